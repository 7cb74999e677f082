#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kdvlab/error.hpp"
#include "kdvlab/lab/config.hpp"
#include "kdvlab/lab/csv.hpp"
#include "kdvlab/lab/experiments.hpp"

using namespace kdvlab;
using namespace kdvlab::lab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("kdvlab_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string config_error_path(const std::string& text) {
  try {
    parse_config(text).validate();
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "";
}

}  // namespace

TEST_CASE("format_double is shortest round trip with a decimal point") {
  CHECK(format_double(1.0) == "1.0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5e-12) == "-2.5e-12");
  for (double x : {1e-4, 0.2, 1.0 / 3.0, 12345.0, 6.02e23}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("config canonical echo round-trips and hashes stably") {
  const ExperimentConfig a = parse_config("");
  const ExperimentConfig b = parse_config(a.canonical());
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  CHECK(a.hash_hex().size() == 16);

  const ExperimentConfig c = parse_config("[sweep]\nensemble = 9\n");
  CHECK(c.hash() != a.hash());
  // The output section does not enter the hash.
  const ExperimentConfig d = parse_config("[output]\ndir = \"elsewhere\"\n");
  CHECK(d.hash() == a.hash());
}

TEST_CASE("config errors carry the field path") {
  CHECK(config_error_path("[grid]\nbogus = 1\n") == "grid.bogus");
  CHECK(config_error_path("[grid]\nn_modes = \"x\"\n") == "grid.n_modes");
  CHECK(config_error_path("[grid]\nn_modes = 64\n") == "grid.grid_size");
  CHECK(config_error_path("[sweep]\neps = [0.1, 0.2]\n") == "sweep.eps");
  CHECK(config_error_path("[perturbation]\nprofile = [[40, 1.0]]\n") == "perturbation.profile[0]");
  CHECK(config_error_path("[nope]\n") == "nope");
  CHECK(config_error_path("[grid\n").rfind("<string>:", 0) == 0);
  CHECK(config_error_path("[sweep]\nhorizon_slow = 0.5\n") == "");
}

TEST_CASE("csv header, cell count and determinism") {
  const fs::path d = scratch("csv");
  auto write = [&](const fs::path& p) {
    CsvWriter w(p, "demo", "00000000deadbeef", {"a", "b"}, {{"eps", "0.1"}});
    w << 0.1 << 3;
    w.end_row();
    w << 1e-300 << std::string("x");
    w.end_row();
  };
  write(d / "one.csv");
  write(d / "two.csv");
  CHECK(slurp(d / "one.csv") == slurp(d / "two.csv"));
  const CsvTable t = read_csv(d / "one.csv");
  REQUIRE(t.comments.size() == 1);
  CHECK(t.comments[0] == "# kdvlab-csv v1 kind=demo config_hash=00000000deadbeef eps=0.1");
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
  CHECK(t.rows[0][0] == "0.1");
  CHECK(t.rows[1][0] == "1e-300");
  CHECK_THROWS(t.column("c"));

  CsvWriter w(d / "bad.csv", "demo", "0", {"a", "b"});
  w << 1.0;
  CHECK_THROWS(w.end_row());
}

TEST_CASE("quantile type 7") {
  CHECK(quantile({4, 1, 3, 2}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({5}, 0.9) == 5.0);
}

TEST_CASE("simulate is byte-deterministic and writes a manifest") {
  ExperimentConfig cfg = parse_config("[simulate]\nt_end_fast = 0.01\nrecord_every = 10\n");
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  write_manifest(cfg, a, "simulate");
  const SimulateResult r = run_simulate(cfg, a);
  run_simulate(cfg, b);
  CHECK(r.records == 11);
  CHECK(r.H_drift <= 1e-8);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  const std::string manifest = slurp(a / "manifest.toml");
  CHECK(manifest.find(cfg.hash_hex()) != std::string::npos);
  // The manifest is itself a valid config with the same hash.
  CHECK(parse_config(manifest).hash() == cfg.hash());
}

TEST_CASE("zero initial data without forcing stays zero") {
  ExperimentConfig cfg =
      parse_config("[simulate]\nt_end_fast = 0.01\nrecord_every = 10\ninitial = []\n");
  const fs::path d = scratch("sim_zero");
  run_simulate(cfg, d);
  const CsvTable t = read_csv(d / "trajectory.csv");
  const std::size_t c = t.column("norm0");
  for (const auto& row : t.rows) CHECK(std::stod(row[c]) == 0.0);
}

TEST_CASE("plot scripts quote paths and tolerate empty reports") {
  const fs::path d = scratch("plots with space");
  const std::string empty = slurp(emit_plots(d));
  CHECK(empty.find("\nplot ") == std::string::npos);
  {
    CsvWriter w(d / "sweep.csv", "sweep", "0", {"eps", "D_median"});
    w << 0.1 << 1.0;
    w.end_row();
  }
  CHECK_THROWS(emit_plots(d));  // missing quartile columns
}

TEST_CASE("a two-member sweep is reproducible") {
  ExperimentConfig cfg = parse_config(
      "[sweep]\neps = [0.2, 0.1]\nensemble = 2\nhorizon_slow = 0.1\n"
      "[equidist]\nwindow_hi_slow = 0.1\n[averaging]\nN_angles = 8\nlattice_shifts = 4\n");
  const fs::path a = scratch("sweep_a"), b = scratch("sweep_b");
  const SweepReport r = run_sweep(cfg, a);
  run_sweep(cfg, b);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].failures == 0);
  CHECK(r.rows[0].D_median > 0.0);
  for (const char* f : {"sweep.csv", "sweep_members.csv", "weyl.csv"}) CHECK(slurp(a / f) == slurp(b / f));
}
