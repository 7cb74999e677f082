#pragma once

// Slow action dynamics: the action rates F_k along the perturbation, their
// averages over the angle torus, the averaged equation dJ/dtau = <F>(J),
// and the ergodic diagnostics (time averages along line flows on T^n, Weyl
// sums of angle series).
//
// (J, theta) -> u uses the linear inverse map; which action backend
// measures I_k is a config choice and is echoed in every report.

#include <complex>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "kdvlab/birkhoff.hpp"
#include "kdvlab/hill.hpp"
#include "kdvlab/kdv_flow.hpp"
#include "kdvlab/perturbation.hpp"

namespace kdvlab {

enum class QuadScheme { monte_carlo, lattice_qmc };
enum class ActionBackend { linear, hill };

QuadScheme parse_quad_scheme(std::string_view id);
ActionBackend parse_backend(std::string_view id);
std::string_view to_string(QuadScheme s);
std::string_view to_string(ActionBackend b);

struct AveragingConfig {
  /// Number of averaged angles N.
  int N_angles = 8;
  /// Points per quadrature: lattice size (per shift) or Monte Carlo draws.
  int M_samples = 64;
  QuadScheme scheme = QuadScheme::lattice_qmc;
  /// Relative finite-difference step for F_k.
  double fd_step = 1e-4;
  ActionBackend backend = ActionBackend::linear;
  /// Random shifts of the lattice; their spread gives the standard error.
  int lattice_shifts = 8;
  /// Korobov generator; 0 selects the best one for (M, N) by the P_2 criterion.
  int korobov_a = 0;
  HillOptions hill;

  /// Throws std::invalid_argument: M_samples >= 16, fd_step in (0, 1e-2], N >= 1.
  void validate() const;
};

/// Backend actions of u on modes 1..n.
std::vector<double> backend_actions(const SpectralField& u, int n, ActionBackend backend,
                                    const HillOptions& hill = {});

/// F_k(u), k = 1..u.n_modes() (hill backend: k <= hill.max_gaps), by
/// central differences of the backend actions along f(x, u).
std::vector<double> slow_field_F(const SpectralField& u, const PerturbationSpec& f, const AveragingConfig& cfg);

/// Closed form for the linear backend: F_k = v_k(u) . v_k(f(u)).
std::vector<double> slow_field_linear(const SpectralField& u, const PerturbationSpec& f);

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct VectorEstimate {
  std::vector<double> value;
  std::vector<double> stderr_;
};

/// P_2-optimal Korobov generator for an M-point lattice in dimension N.
int korobov_generator(int M, int N);

/// Average of g over Phi_theta (+) Id, theta uniform on T^N acting on the
/// first N pairs of v. Deterministic given seed.
Estimate average_first_N(const std::function<double(const BirkhoffState&)>& g, const BirkhoffState& v,
                         const AveragingConfig& cfg, std::uint64_t seed);
VectorEstimate average_first_N(const std::function<std::vector<double>(const BirkhoffState&)>& g,
                               const BirkhoffState& v, const AveragingConfig& cfg, std::uint64_t seed);

/// <F>_N(J): average of slow_field_F at u(theta) = linear_birkhoff_inverse(
/// assemble(J, theta)), with actions beyond N set to zero. Output has
/// J.n_modes() rates; grid_size 0 picks the dealiased grid.
VectorEstimate averaged_field(const ActionVector& J, const PerturbationSpec& f, const AveragingConfig& cfg,
                              std::uint64_t seed, int grid_size = 0);

struct AveragedTrajectory {
  std::vector<double> taus;
  std::vector<ActionVector> J;
  std::vector<std::vector<double>> rates;  ///< <F>(J) at each node (cubic Hermite data)
  std::vector<double> field_noise;         ///< max stderr of <F> at each node
  int clip_events = 0;
  double step = 0.0;
  double lipschitz = 0.0;

  /// J(tau) by cubic Hermite interpolation; throws RangeMismatch outside.
  std::vector<double> at(double tau) const;
};

struct AveragedOptions {
  /// Step bounded so that lipschitz * step <= this.
  double lipschitz_step = 0.1;
  int min_steps = 8;
  /// Fixed step (> 0 overrides the Lipschitz rule).
  double fixed_step = 0.0;
  int lipschitz_probes = 4;
  double clip_floor = 1e-12;
  double clip_abort = 0.01;
};

/// Empirical Lipschitz constant of <F> near J, in the |.|_p action norm.
double empirical_lipschitz(const ActionVector& J, const PerturbationSpec& f, const AveragingConfig& cfg,
                           std::uint64_t seed, int probes = 4, int grid_size = 0);

AveragedTrajectory integrate_averaged(const ActionVector& J0, double T_slow, const PerturbationSpec& f,
                                      const AveragingConfig& cfg, std::uint64_t seed,
                                      const AveragedOptions& opts = {}, int grid_size = 0);

/// g(x) = sum a cos(k . x) + b sin(k . x).
struct TrigPolynomial {
  struct Term {
    std::vector<int> k;
    double a = 0.0;
    double b = 0.0;
  };
  std::vector<Term> terms;

  double operator()(std::span<const double> x) const;
  /// Torus average (the k = 0 coefficient).
  double mean() const;
  /// sum over k != 0 of 2 |g_k| / (T |k . omega|).
  double error_bound(std::span<const double> omega, double T) const;
  /// Largest |k_i|.
  int order() const;
};

struct TimeAverageOptions {
  /// Harmonics |k|_inf <= order are checked for resonance.
  int order = 3;
  double resonance_tol = 1e-9;
  /// Gauss-Legendre panels per radian of the fastest checked harmonic.
  double panels_per_radian = 1.0;
};

/// (1/T) int_0^T g(x0 + omega t) dt. Throws ResonanceDetected listing the
/// first k with |k . omega| <= resonance_tol.
double time_average_quasiperiodic(const std::function<double(std::span<const double>)>& g,
                                  std::span<const double> x0, std::span<const double> omega, double T,
                                  const TimeAverageOptions& opts = {});

/// |mean over the series of exp(i L . phi)|, L over the first L.size() angles.
double weyl_sum(const std::vector<AngleVector>& phi_series, std::span<const int> L);

/// All nonzero L in {-order..order}^m up to sign (L and -L give the same modulus).
std::vector<std::vector<int>> weyl_frequencies(int m, int order);

/// Per recorded state: |I(state) - J(tau)|_p with I from `backend`.
std::vector<double> action_deviation(const Trajectory& traj, const AveragedTrajectory& avg, SobolevIndex p,
                                     ActionBackend backend, const HillOptions& hill = {});

/// sup of action_deviation.
double compare_actions(const Trajectory& traj, const AveragedTrajectory& avg, SobolevIndex p,
                       ActionBackend backend, const HillOptions& hill = {});

/// Fixed-order pairwise sum.
double pairwise_sum(std::span<const double> x);

}  // namespace kdvlab
