#pragma once

// Experiment configuration (TOML). Every field is validated on load and
// errors name the offending key path. The canonical echo written to the
// manifest parses back to the same config and the same hash.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kdvlab/averaging.hpp"
#include "kdvlab/gaussian_measure.hpp"
#include "kdvlab/perturbation.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab::lab {

/// (s, coefficient of e_s) entries.
using ModeList = std::vector<std::pair<int, double>>;

struct GridConfig {
  int n_modes = 32;
  int grid_size = 128;
  double dt_fast = 1e-4;
};

struct PerturbationConfig {
  std::string map = "none";
  ModeList profile{{1, 1.0}, {-2, 0.5}};
  double zeta0 = 2.0;
  double gain = 0.0;
  double order = 0.0;
};

struct MeasureConfig {
  double p = 3.0;
  double zeta0 = 2.0;
  double sigma_exponent = 2.0;
  /// > 0: scale chosen so that E ||u0||_0^2 = target_l2^2; otherwise sigma_scale.
  double target_l2 = 0.05;
  double sigma_scale = 1.0;
  double max_admissibility_ratio = 1e6;
};

struct SweepConfig {
  std::vector<double> eps{0.2, 0.1, 0.05};
  double horizon_slow = 0.5;
  int ensemble = 8;
  int record_every = 10;
  /// Norm index of the reported D(eps); the weight index p is also emitted.
  double report_p = 1.0;
  /// Threshold defining the empirical good fraction.
  double rho = 1e-3;
  double norm_ceiling_factor = 10.0;
};

struct EquidistConfig {
  int m_angles = 3;
  int order = 2;
  double window_lo_slow = 0.0;
  double window_hi_slow = 0.5;
};

struct QiConfig {
  std::vector<int> n_list{2, 4, 8};
  double eps = 0.1;
  double horizon_slow = 0.5;
  int ensemble = 64;
  int ball_samples = 1024;
  int record_points = 50;
};

struct SimulateConfig {
  double eps = 0.0;
  double t_end_fast = 1.0;
  ModeList initial{{1, 0.05}, {-2, 0.02}};
  int record_every = 100;
  std::string backend = "linear";
  int n_actions = 8;
  double norm_p = 3.0;
};

struct AveragingSection {
  int N_angles = 32;
  int M_samples = 64;
  std::string scheme = "lattice_qmc";
  double fd_step = 1e-4;
  std::string backend = "linear";
  int lattice_shifts = 8;
  int korobov_a = 0;
};

struct ExperimentConfig {
  std::string scenario = "standard";
  GridConfig grid;
  PerturbationConfig perturbation;
  MeasureConfig measure;
  SweepConfig sweep;
  AveragingSection averaging;
  EquidistConfig equidist;
  QiConfig qi;
  SimulateConfig simulate;
  std::uint64_t seed = 20240601;
  std::string output_dir = "out";

  /// Cross-field checks; throws ConfigError with the field path.
  void validate() const;

  PerturbationSpec make_perturbation() const;
  MeasureSpec make_measure() const;
  AveragingConfig make_averaging() const;
  SpectralField make_initial() const;

  /// Canonical TOML echo (the manifest body).
  std::string canonical() const;
  /// FNV-1a 64 of canonical() without the output section.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace kdvlab::lab
