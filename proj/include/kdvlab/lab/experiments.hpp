#pragma once

// Experiment drivers behind the CLI subcommands. Each run writes its CSVs
// and a manifest (canonical config echo + hash) into the output directory.

#include <filesystem>
#include <string>
#include <vector>

#include "kdvlab/gaussian_measure.hpp"
#include "kdvlab/lab/config.hpp"

namespace kdvlab::lab {

namespace fs = std::filesystem;

void write_manifest(const ExperimentConfig& cfg, const fs::path& out_dir, const std::string& command);

struct SimulateResult {
  fs::path csv;
  std::size_t records = 0;
  double H_drift = 0.0;   ///< max relative drift of H over the records
  double l2_drift = 0.0;  ///< max relative drift of ||u||_0
};

SimulateResult run_simulate(const ExperimentConfig& cfg, const fs::path& out_dir);

struct MemberResult {
  bool ok = true;
  std::string error;
  double D = 0.0;   ///< sup_tau |I - J| in the report norm
  double Dp = 0.0;  ///< same in the measure's weight index p
  std::vector<double> weyl;  ///< per frequency of EnsembleResult::L
  double weyl_max = 0.0;
  int clip_events = 0;
  bool ceiling_violation = false;
};

struct EnsembleResult {
  double eps = 0.0;
  std::vector<std::vector<int>> L;
  std::vector<MemberResult> members;
  int failures() const;
};

/// Sweep members at one eps: sample u0, integrate to T/eps, integrate the
/// averaged equation from the initial actions, measure D and Weyl sums.
/// The initial data do not depend on eps. Throws NumericalError when more
/// than a quarter of the members fail.
EnsembleResult run_ensemble(const ExperimentConfig& cfg, double eps, bool with_averaging = true);

struct SweepRow {
  double eps = 0.0;
  int members = 0;
  int failures = 0;
  double D_median = 0.0, D_q1 = 0.0, D_q3 = 0.0;
  double Dp_median = 0.0, Dp_q1 = 0.0, Dp_q3 = 0.0;
  double good_fraction = 0.0;
  double weyl_max_median = 0.0;
  double weyl_max_max = 0.0;
  int clip_events = 0;
  int ceiling_violations = 0;
};

struct WeylRow {
  double eps = 0.0;
  std::vector<int> L;
  double mean = 0.0, median = 0.0, max = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<WeylRow> weyl;
  bool D_strictly_decreasing = false;
  bool D_halved = false;  ///< D(last eps) <= 0.5 D(first eps)
  bool weyl_decreasing = false;
};

SweepReport summarize(const std::vector<EnsembleResult>& runs, double rho);

SweepReport run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir);
SweepReport run_equidist(const ExperimentConfig& cfg, const fs::path& out_dir);

struct QiRun {
  std::vector<QiReport> probes;  ///< one per qi.n_list entry
  QiReport control;              ///< f = 0 at the largest n
  double cn_spread = 0.0;        ///< max/min of max|c^n| across n, minus 1
};

QiRun run_qi(const ExperimentConfig& cfg, const fs::path& out_dir);

/// Writes plots.gp next to the CSVs found in dir; returns the script path.
fs::path emit_plots(const fs::path& dir);

/// Type-7 quantile of x (copied and sorted).
double quantile(std::vector<double> x, double q);

}  // namespace kdvlab::lab
