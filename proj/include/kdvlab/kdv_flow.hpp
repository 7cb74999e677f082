#pragma once

// Time integration of u_t + u_xxx - 6 u u_x = eps f(x, u) on the circle.
//
// The dispersive part is diagonal in the pair basis (mode k rotates at
// (2 pi k)^3) and is solved exactly; the remainder 6 u u_x + eps f is
// advanced by the classical fourth-order Runge-Kutta scheme in the
// rotating frame (integrating-factor RK4).

#include <vector>

#include "kdvlab/birkhoff.hpp"
#include "kdvlab/perturbation.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab {

struct FlowParams {
  double eps = 0.0;
  /// Fast-time step; a negative step integrates backwards.
  double dt = 1e-4;
  /// Length of the integration interval in fast time (> 0).
  double t_end = 1.0;
  int record_every = 1;
  /// Norm monitored against the ceiling and reported as norm_p.
  SobolevIndex norm_p{3.0};
  /// Abort when ||u||_p exceeds this multiple of the a-priori scale.
  double norm_ceiling_factor = 10.0;
  /// t_end may not exceed safety_horizon * max(1, 1/eps).
  double safety_horizon = 10.0;
  /// Fourier-Galerkin truncation of the vector field; 0 keeps all modes.
  int galerkin_cutoff = 0;

  /// Throws std::invalid_argument on eps < 0, dt == 0, t_end <= 0 or record_every < 1.
  void validate() const;
  /// Explicit-stage stability: |dt| * max|6 u| * 2 pi n_modes below the RK4 limit.
  /// Throws StepFailure when violated.
  void check_stability(const SpectralField& u) const;
};

struct Trajectory {
  std::vector<double> times;  ///< strictly monotone in the direction of dt
  std::vector<SpectralField> states;
  double eps = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  double tau(std::size_t i) const noexcept { return eps * times[i]; }
};

/// Reusable integrating-factor RK4 stepper (phase factors and workspaces
/// precomputed). Not thread-safe; use one per thread.
class KdvStepper {
 public:
  KdvStepper(int n_modes, int grid_size, const FlowParams& params, const PerturbationSpec& f);
  /// One step of size params.dt in place. Throws IntegrationBlowup(t) on non-finite values.
  void advance(SpectralField& u, double t = 0.0);

 private:
  void rhs(const std::vector<std::complex<double>>& z, std::vector<std::complex<double>>& out);

  int n_;
  int grid_;
  double dt_;
  double eps_;
  int cutoff_;
  PerturbationSpec f_;
  std::vector<std::complex<double>> half_;  // e^{i w_k dt / 2}
  std::vector<std::complex<double>> k1_, k2_, k3_, k4_, tmp_, ez_, z0_;
  SpectralField scratch_u_, scratch_f_;
};

SpectralField step(const SpectralField& u, const FlowParams& params, const PerturbationSpec& f);

/// Integrates from t_start over params.t_end (backwards when dt < 0), keeping
/// every record_every-th state (the initial and final states always).
Trajectory integrate(const SpectralField& u0, const FlowParams& params, const PerturbationSpec& f,
                     double t_start = 0.0);

/// Zeroes all coefficients with |s| > n.
SpectralField galerkin_truncate(const SpectralField& u, int n);

/// For each cutoff n in n_list (increasing), the sup over recorded times of
/// ||u_n(t) - u_ref(t)||_{params.norm_p}, where u_n solves the n-truncated
/// dynamics from the truncated data and u_ref is the last entry of n_list.
std::vector<double> galerkin_convergence_probe(const SpectralField& u0, const FlowParams& params,
                                               const PerturbationSpec& f, const std::vector<int>& n_list);

struct FrequencyOptions {
  double dt = 1e-4;
  int sample_every = 1;
  /// Minimum linear action for a mode's angle to count as defined.
  double action_threshold = 0.5 * kAngleZeroThreshold * kAngleZeroThreshold;
};

/// Least-squares fit of the unwrapped angles phi_k(t), k <= k_max, along the
/// unperturbed flow over [0, T].
FrequencyVector estimate_frequencies(const SpectralField& u0, double T, int k_max,
                                     const FrequencyOptions& opts = {});

}  // namespace kdvlab
