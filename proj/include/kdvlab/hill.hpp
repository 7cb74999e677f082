#pragma once

// Periodic spectrum of the Hill operator L = -d^2/dx^2 + u on [0, 1].
//
// The Floquet discriminant Delta(lambda) is the trace of the transfer matrix
// over one period. Its n-th gap [lo, hi] (where |Delta| >= 2, near (n pi)^2)
// has length comparable to the n-th Fourier coefficient of u, and the
// action of mode n is
//
//   I_n = (2 / pi) * int_lo^hi arccosh(|Delta(lambda)| / 2) d lambda,
//
// normalized so that I_n = |u_n|^2 / (4 pi n) + O(|u|^3), matching the
// linear action of the pair (u_n, u_-n).

#include <utility>
#include <vector>

#include "kdvlab/birkhoff.hpp"
#include "kdvlab/spectral.hpp"

namespace kdvlab {

struct HillOptions {
  /// RK4 steps per period (the potential is sampled at twice this rate).
  int steps = 2048;
  /// Chebyshev nodes for the action integral.
  int quad_nodes = 32;
  /// A gap counts as open when max |Delta| - 2 exceeds this.
  double collapse_tol = 1e-12;
  /// Largest gap index accepted by hill_gaps / hill_actions.
  int max_gaps = 64;
};

struct Gap {
  double lo = 0.0;
  double hi = 0.0;
  /// Location of the extremum of Delta inside the gap.
  double peak = 0.0;
  bool open = false;
  double length() const noexcept { return hi - lo; }
};

/// Delta for a fixed potential, sampled once. Evaluation is const and may be
/// shared across threads.
class HillDiscriminant {
 public:
  explicit HillDiscriminant(const SpectralField& u, const HillOptions& opts = {});

  /// Trace of the monodromy at lambda. Throws StepFailure when the step
  /// cannot resolve the oscillation (sqrt|lambda| / steps > 0.25).
  double operator()(double lambda) const;
  /// The n-th gap (n >= 1). Throws RootBracketFailure.
  Gap gap(int n) const;
  /// Action of an already located gap.
  double action(const Gap& g) const;

  const HillOptions& options() const noexcept { return opts_; }

 private:
  HillOptions opts_;
  std::vector<double> q_;  // u at x = k / (2 steps), k = 0 .. 2 steps
};

/// Delta(lambda) for potential u.
double hill_discriminant(const SpectralField& u, double lambda, const HillOptions& opts = {});

/// Endpoints (lo, hi) of gaps 1..n_gaps; collapsed gaps have lo == hi.
std::vector<std::pair<double, double>> hill_gaps(const SpectralField& u, int n_gaps, const HillOptions& opts = {});

/// Actions I_1..I_n from the gap data. Throws UnresolvedGap listing every
/// index whose endpoints could not be bracketed.
ActionVector hill_actions(const SpectralField& u, int n, SobolevIndex p = SobolevIndex(0.0),
                          const HillOptions& opts = {});

}  // namespace kdvlab
