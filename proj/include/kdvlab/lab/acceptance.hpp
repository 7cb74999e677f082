#pragma once

// Acceptance criteria 1-10 as runnable checks. The acceptance test binary
// and `kdvlab check` both print one line per criterion from these results.

#include <string>
#include <vector>

#include "kdvlab/lab/config.hpp"
#include "kdvlab/lab/experiments.hpp"

namespace kdvlab::lab {

struct CriterionResult {
  CriterionResult() = default;
  CriterionResult(int id_, std::string title_) : id(id_), title(std::move(title_)) {}

  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  std::vector<std::string> notes;  ///< supplementary diagnostics, not gating
};

CriterionResult criterion_conservation();     // 1
CriterionResult criterion_reversibility();    // 2
CriterionResult criterion_airy_limit();       // 3
CriterionResult criterion_backends();         // 4
CriterionResult criterion_action_tracking(const SweepReport& rep);  // 5
CriterionResult criterion_equidistribution(const SweepReport& rep);  // 6
CriterionResult criterion_energy_bound();     // 7
CriterionResult criterion_time_average();     // 8
CriterionResult criterion_quasi_invariance(const QiRun& run);  // 9
CriterionResult criterion_averaging_layer();  // 10

/// Runs the selected criteria (all when ids is empty). The sweep and the
/// probe are computed once from cfg and written under out_dir.
std::vector<CriterionResult> run_acceptance(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                            const std::vector<int>& ids = {});

/// "[PASS] 1 title: detail"
std::string format_result(const CriterionResult& r);

}  // namespace kdvlab::lab
