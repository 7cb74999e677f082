#pragma once

// Action-angle layer. Birkhoff coordinates v = (v_j, v_-j)_{j>=1} carry the
// weighted norm |v|_p^2 = sum_j (2 pi j)^{2p+1} |v_j|^2; actions are
// I_j = |v_j|^2 / 2 and angles phi_j = arg(v_j, v_-j).
//
// Only the linearization v_s = |2 pi s|^{-1/2} u_s of the nonlinear map is
// realized as a forward/inverse pair. Exact actions come from the Hill
// spectrum (hill.hpp).

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "kdvlab/spectral.hpp"

namespace kdvlab {

class BirkhoffState {
 public:
  BirkhoffState() = default;
  explicit BirkhoffState(int n_modes, SobolevIndex p = SobolevIndex(0.0));
  static BirkhoffState from_pairs(std::vector<double> pairs, SobolevIndex p = SobolevIndex(0.0));

  int n_modes() const noexcept { return static_cast<int>(pairs_.size() / 2); }
  SobolevIndex p() const noexcept { return p_; }
  void set_p(SobolevIndex p) noexcept { p_ = p; }

  /// (v_j, v_-j), j >= 1.
  std::array<double, 2> pair(int j) const;
  void set_pair(int j, double vj, double vmj);

  std::span<const double> pairs() const noexcept { return pairs_; }
  std::span<double> pairs() noexcept { return pairs_; }
  std::span<const std::complex<double>> modes() const noexcept;
  std::span<std::complex<double>> modes() noexcept;

  /// |v|_p.
  double norm() const;
  double norm_sq() const;

 private:
  std::vector<double> pairs_;
  SobolevIndex p_{0.0};
};

class ActionVector {
 public:
  ActionVector() = default;
  explicit ActionVector(int n_modes, SobolevIndex p = SobolevIndex(0.0));
  /// Throws std::invalid_argument on a negative entry.
  ActionVector(std::vector<double> actions, SobolevIndex p);

  int n_modes() const noexcept { return static_cast<int>(actions_.size()); }
  SobolevIndex p() const noexcept { return p_; }
  void set_p(SobolevIndex p) noexcept { p_ = p; }
  /// I_j, j >= 1.
  double operator()(int j) const { return actions_.at(static_cast<std::size_t>(j - 1)); }
  std::span<const double> values() const noexcept { return actions_; }
  std::span<double> values() noexcept { return actions_; }

  /// |I|_p = 2 sum_j (2 pi j)^{2p+1} |I_j|.
  double norm() const;

 private:
  std::vector<double> actions_;
  SobolevIndex p_{0.0};
};

/// |a - b|_p in the weighted l1 norm of action space over the common modes.
double action_distance(std::span<const double> a, std::span<const double> b, SobolevIndex p);

struct AngleVector {
  std::vector<double> angles;   ///< each in [0, 2 pi)
  std::vector<bool> near_zero;  ///< pair treated as zero, angle set to 0

  int n_modes() const noexcept { return static_cast<int>(angles.size()); }
  static AngleVector zeros(int n);
  static AngleVector from(std::vector<double> raw);
};

struct FrequencyVector {
  std::vector<double> freqs;      ///< W_k, k = 1..n
  std::vector<double> residuals;  ///< RMS phase residual of the fit divided by the fit span
  int n_modes() const noexcept { return static_cast<int>(freqs.size()); }
};

/// Pairs with |v_j| below this are zero for angle purposes.
inline constexpr double kAngleZeroThreshold = 1e-9;

BirkhoffState linear_birkhoff(const SpectralField& u, SobolevIndex p = SobolevIndex(0.0));
SpectralField linear_birkhoff_inverse(const BirkhoffState& v, int grid_size = 0);
ActionVector actions(const BirkhoffState& v);
AngleVector angles(const BirkhoffState& v, double zero_threshold = kAngleZeroThreshold);
BirkhoffState assemble(const ActionVector& I, const AngleVector& phi);

/// actions(linear_birkhoff(u)).
ActionVector linear_actions(const SpectralField& u, SobolevIndex p = SobolevIndex(0.0));

}  // namespace kdvlab
