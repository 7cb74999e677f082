// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.
//
//   kdvlab_acceptance [config.toml] [--only 1,2,...]

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kdvlab/lab/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace kdvlab::lab;
  ExperimentConfig cfg;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string t; std::getline(ss, t, ',');) ids.push_back(std::stoi(t));
    } else {
      cfg = load_config(a);
    }
  }
  cfg.validate();
  const auto out = std::filesystem::path(cfg.output_dir) / "acceptance";
  bool all = true;
  for (const auto& r : run_acceptance(cfg, out, ids)) {
    std::cout << format_result(r) << std::endl;
    all = all && r.passed;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
