#include "kdvlab/hill.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "kdvlab/error.hpp"

namespace kdvlab {

namespace {

constexpr double kPi = std::numbers::pi;

// arccosh(1 + t) without the cancellation of acosh near 1.
double acosh1p(double t) { return std::log1p(t + std::sqrt(t * (t + 2.0))); }

int pow2_at_least(int n) {
  int m = 4;
  while (m < n) m *= 2;
  return m;
}

}  // namespace

HillDiscriminant::HillDiscriminant(const SpectralField& u, const HillOptions& opts) : opts_(opts) {
  if (opts_.steps < 16 || (opts_.steps & (opts_.steps - 1)) != 0) {
    throw std::invalid_argument("hill steps must be a power of two >= 16");
  }
  if (opts_.quad_nodes < 2) throw std::invalid_argument("hill quad_nodes must be >= 2");
  const int samples = 2 * opts_.steps;
  if (samples < 2 * u.n_modes() + 2) throw std::invalid_argument("hill steps too coarse for the potential");
  q_ = u.to_grid(pow2_at_least(samples));
  q_.push_back(q_.front());
}

double HillDiscriminant::operator()(double lambda) const {
  const int n = opts_.steps;
  const double h = 1.0 / n;
  if (std::sqrt(std::abs(lambda)) * h > 0.25) {
    throw StepFailure("hill discriminant: lambda=" + std::to_string(lambda) + " not resolved by " +
                      std::to_string(n) + " steps");
  }
  // Transfer matrix M' = A(x) M, A = [[0, 1], [q - lambda, 0]], columns
  // (y1, y1') and (y2, y2').
  double a = 1.0, b = 0.0;  // y1, y1'
  double c = 0.0, d = 1.0;  // y2, y2'
  for (int k = 0; k < n; ++k) {
    const double q0 = q_[2 * k] - lambda;
    const double qm = q_[2 * k + 1] - lambda;
    const double q1 = q_[2 * k + 2] - lambda;
    auto stage = [&](double y, double yp) {
      const double k1y = yp, k1p = q0 * y;
      const double k2y = yp + 0.5 * h * k1p, k2p = qm * (y + 0.5 * h * k1y);
      const double k3y = yp + 0.5 * h * k2p, k3p = qm * (y + 0.5 * h * k2y);
      const double k4y = yp + h * k3p, k4p = q1 * (y + h * k3y);
      return std::pair{y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
                       yp + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)};
    };
    std::tie(a, b) = stage(a, b);
    std::tie(c, d) = stage(c, d);
  }
  return a + d;
}

Gap HillDiscriminant::gap(int n) const {
  if (n < 1) throw std::invalid_argument("gap index must be >= 1");
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  const double lo_end = (n - 0.5) * (n - 0.5) * kPi * kPi;
  const double hi_end = (n + 0.5) * (n + 0.5) * kPi * kPi;
  auto g = [&](double lambda) { return sign * (*this)(lambda) - 2.0; };

  // sign * Delta has a single maximum between the band edges around (n pi)^2.
  const auto [peak, neg_max] =
      boost::math::tools::brent_find_minima([&](double lambda) { return -g(lambda); }, lo_end, hi_end, 52);
  Gap out;
  out.peak = peak;
  const double height = -neg_max;
  if (!(height > opts_.collapse_tol)) {
    out.lo = out.hi = peak;
    return out;
  }
  if (!(g(lo_end) < 0.0) || !(g(hi_end) < 0.0)) throw RootBracketFailure(n, lo_end, hi_end);

  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto solve = [&](double a, double b) {
    std::uintmax_t iters = 200;
    const auto [r0, r1] = boost::math::tools::toms748_solve(g, a, b, tol, iters);
    if (iters >= 200) throw RootBracketFailure(n, a, b);
    return 0.5 * (r0 + r1);
  };
  out.lo = solve(lo_end, peak);
  out.hi = solve(peak, hi_end);
  out.open = true;
  return out;
}

double HillDiscriminant::action(const Gap& gp) const {
  if (!gp.open || gp.hi <= gp.lo) return 0.0;
  // lambda = m + r x, x in [-1, 1]; the integrand vanishes like sqrt(1 - x^2)
  // at both edges, so factor that weight out and use Chebyshev nodes of the
  // second kind.
  const double m = 0.5 * (gp.lo + gp.hi);
  const double r = 0.5 * (gp.hi - gp.lo);
  const int nq = opts_.quad_nodes;
  double sum = 0.0;
  for (int i = 1; i <= nq; ++i) {
    const double th = i * kPi / (nq + 1);
    const double x = std::cos(th);
    const double s = std::sin(th);
    const double t = std::max(0.0, 0.5 * std::abs((*this)(m + r * x)) - 1.0);
    sum += s * acosh1p(t);
  }
  return (2.0 / kPi) * r * (kPi / (nq + 1)) * sum;
}

double hill_discriminant(const SpectralField& u, double lambda, const HillOptions& opts) {
  return HillDiscriminant(u, opts)(lambda);
}

std::vector<std::pair<double, double>> hill_gaps(const SpectralField& u, int n_gaps, const HillOptions& opts) {
  if (n_gaps < 1 || n_gaps > opts.max_gaps) {
    throw std::invalid_argument("n_gaps must be in [1, " + std::to_string(opts.max_gaps) + "]");
  }
  const HillDiscriminant disc(u, opts);
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(n_gaps));
  for (int n = 1; n <= n_gaps; ++n) {
    const Gap g = disc.gap(n);
    out.emplace_back(g.lo, g.hi);
  }
  return out;
}

ActionVector hill_actions(const SpectralField& u, int n, SobolevIndex p, const HillOptions& opts) {
  if (n < 1 || n > opts.max_gaps) throw std::invalid_argument("hill_actions: n out of range");
  const HillDiscriminant disc(u, opts);
  std::vector<double> I(static_cast<std::size_t>(n), 0.0);
  std::vector<int> unresolved;
  for (int j = 1; j <= n; ++j) {
    try {
      I[j - 1] = disc.action(disc.gap(j));
    } catch (const RootBracketFailure&) {
      unresolved.push_back(j);
    }
  }
  if (!unresolved.empty()) throw UnresolvedGap(unresolved);
  return ActionVector(std::move(I), p);
}

}  // namespace kdvlab
