#pragma once

// Diagonal Gaussian measures on Birkhoff space with density proportional to
//
//   prod_j exp(-(2 pi j)^{1+2p} |v_j|^2 / (2 sigma_j)),
//
// i.e. each component of v_j has variance sigma_j (2 pi j)^{-(1+2p)}, and
// their transport along the slow-time Galerkin flow
//
//   dv/dtau = eps^{-1} W J v + X(v),   W_j = (2 pi j)^3,
//
// where X is the pushforward of the perturbation under the linearized
// Birkhoff map and J rotates each pair by a quarter turn.

#include <cstdint>
#include <string>
#include <vector>

#include "kdvlab/birkhoff.hpp"
#include "kdvlab/perturbation.hpp"

namespace kdvlab {

class MeasureSpec {
 public:
  MeasureSpec() = default;
  /// sigma_j = scale * j^{-exponent}, j = 1..n_modes.
  static MeasureSpec power_law(int n_modes, SobolevIndex p, double zeta0, double exponent, double scale = 1.0);
  /// Power law with the scale chosen so that E ||u||_0^2 = target_l2^2 under
  /// the linear inverse map.
  static MeasureSpec power_law_with_l2(int n_modes, SobolevIndex p, double zeta0, double exponent,
                                       double target_l2);
  static MeasureSpec from_sigma(std::vector<double> sigma, SobolevIndex p, double zeta0);

  int n_modes() const noexcept { return static_cast<int>(sigma_.size()); }
  SobolevIndex p() const noexcept { return p_; }
  double zeta0() const noexcept { return zeta0_; }
  const std::vector<double>& sigma() const noexcept { return sigma_; }
  const std::string& sigma_rule() const noexcept { return rule_; }
  /// Per-component variance sigma_j (2 pi j)^{-(1+2p)}, j 1-based.
  double variance(int j) const { return var_.at(static_cast<std::size_t>(j - 1)); }
  /// E ||u||_0^2 = 2 sum_j sigma_j (2 pi j)^{-2p}.
  double expected_l2_sq() const;
  /// E |v|_p^2 = 2 sum_j sigma_j.
  double expected_norm_sq() const { return 2.0 * sigma_sum(); }
  double sigma_sum() const;

  /// Same rule restricted to the first n modes.
  MeasureSpec truncated(int n) const;

  /// sup_j j^{-zeta0} / sigma_j.
  double admissibility_ratio() const;
  /// sigma_n / sum_j sigma_j: how much the last retained mode still adds.
  double edge_increment() const;
  /// True when the rule is a power law with exponent > 1 (summable tail).
  bool summable() const noexcept { return exponent_ > 1.0; }
  /// Throws std::invalid_argument unless sigma_j > 0, zeta0 > 1, the tail is
  /// summable and admissibility_ratio() <= max_ratio.
  void validate(double max_ratio = 1e6) const;

 private:
  void refresh();

  std::vector<double> sigma_;
  std::vector<double> var_;
  SobolevIndex p_{3.0};
  double zeta0_ = 2.0;
  double exponent_ = 2.0;
  std::string rule_;
};

/// One draw; pair j of member `member` uses stream (seed, member, j).
BirkhoffState sample(const MeasureSpec& m, std::uint64_t seed, std::uint64_t member = 0);

/// Phi_theta: rotates pair j by theta_j.
BirkhoffState rotate(const BirkhoffState& v, const AngleVector& theta);

/// log of the n-dimensional Gaussian density at v (n = m.n_modes()).
double log_density(const MeasureSpec& m, const BirkhoffState& v);

/// X(v): the perturbation pushed forward by the linearized Birkhoff map.
BirkhoffState pushforward_field(const BirkhoffState& v, const PerturbationSpec& f, int grid_size = 0);

/// div X by central differences of step fd_step (exact for the
/// u-independent and diagonal parts).
double field_divergence(const BirkhoffState& v, const PerturbationSpec& f, double fd_step);

/// Liouville rate c^n = div X + grad log b . X
///   = sum_j (dX_j/dv_j + dX_-j/dv_-j) - sum_j (2 pi j)^{1+2p} (v_j . X_j) / sigma_j.
double cn_divergence(const BirkhoffState& v, const PerturbationSpec& f, const MeasureSpec& m,
                     double fd_step = 1e-6);

/// c^n of the rotation field eps^{-1} W J v alone, relative to the size of
/// its individual terms. Zero up to rounding.
double rotation_cn(const BirkhoffState& v, const MeasureSpec& m, double eps);

struct DensityRecord {
  double tau = 0.0;
  double log_b = 0.0;
  double cn = 0.0;
  double A = 0.0;  ///< int_0^tau c^n ds
};

struct QiOptions {
  int record_points = 50;
  /// RK4 step as a fraction of the fastest active rotation period eps / W_j.
  double step_fraction = 0.25;
  /// Samples for the ball-measure hit count (0 skips the test).
  int ball_samples = 1024;
  double fd_step = 1e-6;
  /// Liouville identity tolerance (absolute, scaled by max(1, |A|)).
  double identity_tol = 1e-4;
};

struct QiMemberReport {
  std::vector<DensityRecord> records;
  double max_abs_cn = 0.0;
  double max_abs_A = 0.0;
  /// max_tau |log b(tau) - log b(0) + int div X - A(tau)|.
  double identity_residual = 0.0;
};

struct BallTest {
  double radius = 0.0;
  int samples = 0;
  int hits_initial = 0;   ///< v in B
  int hits_flowed = 0;    ///< S^{-tau} v in B, i.e. v in S^tau(B)
  double ratio = 1.0;     ///< mu(S^tau B) / mu(B)
  double ci_lo = 1.0;     ///< 95% interval for the ratio
  double ci_hi = 1.0;
  double bound_lo = 1.0;  ///< e^{-C tau}
  double bound_hi = 1.0;  ///< e^{C tau}
  bool passed = true;
};

struct QiReport {
  int n_modes = 0;
  double eps = 0.0;
  double tau_end = 0.0;
  std::vector<QiMemberReport> members;
  double c_hat_tau = 0.0;     ///< max over members and tau of |A|
  double max_abs_cn = 0.0;
  double identity_residual = 0.0;
  double rotation_residual = 0.0;
  BallTest ball;
  bool identity_ok = false;
};

/// Slow-time Galerkin flow over [0, tau] (tau may be negative) from v,
/// integrating-factor RK4 with the rotation and diagonal damping solved
/// exactly. Appends A and int div X when the pointers are non-null.
BirkhoffState qi_flow(const BirkhoffState& v, const PerturbationSpec& f, const MeasureSpec& m, double eps,
                      double tau, const QiOptions& opts, std::vector<DensityRecord>* records = nullptr,
                      double* div_integral = nullptr);

/// Quasi-invariance probe on the first m.n_modes() modes: ensemble density
/// tracking plus the ball-measure hit test.
QiReport quasi_invariance_probe(const MeasureSpec& m, const PerturbationSpec& f, double eps, double tau_end,
                                int ensemble_size, std::uint64_t seed, const QiOptions& opts = {});

}  // namespace kdvlab
