#include "kdvlab/gaussian_measure.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "kdvlab/parallel.hpp"
#include "kdvlab/rng.hpp"

namespace kdvlab {

namespace {

using cplx = std::complex<double>;

constexpr std::uint64_t kBallTag = 0xBA11;
constexpr std::uint64_t kPilotTag = 0x9170;

double rotation_speed(int j) { return std::pow(kTwoPi * j, 3.0); }

}  // namespace

MeasureSpec MeasureSpec::power_law(int n_modes, SobolevIndex p, double zeta0, double exponent, double scale) {
  if (n_modes < 1) throw std::invalid_argument("measure needs at least one mode");
  if (!(scale > 0.0)) throw std::invalid_argument("measure scale must be positive");
  MeasureSpec m;
  m.p_ = p;
  m.zeta0_ = zeta0;
  m.exponent_ = exponent;
  m.sigma_.resize(static_cast<std::size_t>(n_modes));
  for (int j = 1; j <= n_modes; ++j) m.sigma_[j - 1] = scale * std::pow(static_cast<double>(j), -exponent);
  m.rule_ = fmt::format("{:.17g}*j^-{:.17g}", scale, exponent);
  m.refresh();
  return m;
}

MeasureSpec MeasureSpec::power_law_with_l2(int n_modes, SobolevIndex p, double zeta0, double exponent,
                                           double target_l2) {
  if (!(target_l2 > 0.0)) throw std::invalid_argument("target L2 norm must be positive");
  const MeasureSpec unit = power_law(n_modes, p, zeta0, exponent, 1.0);
  return power_law(n_modes, p, zeta0, exponent, target_l2 * target_l2 / unit.expected_l2_sq());
}

MeasureSpec MeasureSpec::from_sigma(std::vector<double> sigma, SobolevIndex p, double zeta0) {
  if (sigma.empty()) throw std::invalid_argument("measure needs at least one mode");
  MeasureSpec m;
  m.p_ = p;
  m.zeta0_ = zeta0;
  m.sigma_ = std::move(sigma);
  // Fit the decay exponent from the end points for the summability check.
  const int n = m.n_modes();
  m.exponent_ = n > 1 && m.sigma_.front() > 0.0 && m.sigma_.back() > 0.0
                    ? -std::log(m.sigma_.back() / m.sigma_.front()) / std::log(static_cast<double>(n))
                    : 2.0;
  m.rule_ = "explicit";
  m.refresh();
  return m;
}

void MeasureSpec::refresh() {
  var_.resize(sigma_.size());
  for (int j = 1; j <= n_modes(); ++j) {
    var_[j - 1] = sigma_[j - 1] * std::pow(kTwoPi * j, -(1.0 + 2.0 * p_.value()));
  }
}

double MeasureSpec::expected_l2_sq() const {
  double s = 0.0;
  for (int j = 1; j <= n_modes(); ++j) s += sigma_[j - 1] * std::pow(kTwoPi * j, -2.0 * p_.value());
  return 2.0 * s;
}

double MeasureSpec::sigma_sum() const {
  double s = 0.0;
  for (double x : sigma_) s += x;
  return s;
}

MeasureSpec MeasureSpec::truncated(int n) const {
  if (n < 1 || n > n_modes()) throw std::invalid_argument("truncation out of range");
  MeasureSpec m = *this;
  m.sigma_.resize(static_cast<std::size_t>(n));
  m.refresh();
  return m;
}

double MeasureSpec::admissibility_ratio() const {
  double r = 0.0;
  for (int j = 1; j <= n_modes(); ++j) r = std::max(r, std::pow(static_cast<double>(j), -zeta0_) / sigma_[j - 1]);
  return r;
}

double MeasureSpec::edge_increment() const { return sigma_.back() / sigma_sum(); }

void MeasureSpec::validate(double max_ratio) const {
  if (!(zeta0_ > 1.0)) throw std::invalid_argument("measure zeta0 must exceed 1");
  for (int j = 1; j <= n_modes(); ++j) {
    if (!(sigma_[j - 1] > 0.0)) throw std::invalid_argument("sigma_" + std::to_string(j) + " must be positive");
  }
  if (!summable()) throw std::invalid_argument("sigma rule is not summable (decay exponent <= 1)");
  if (admissibility_ratio() > max_ratio) {
    throw std::invalid_argument(fmt::format("sup j^-zeta0/sigma_j = {:g} exceeds {:g}", admissibility_ratio(), max_ratio));
  }
}

BirkhoffState sample(const MeasureSpec& m, std::uint64_t seed, std::uint64_t member) {
  BirkhoffState v(m.n_modes(), m.p());
  for (int j = 1; j <= m.n_modes(); ++j) {
    Stream rng = make_stream(seed, {member, static_cast<std::uint64_t>(j)});
    std::normal_distribution<double> normal(0.0, std::sqrt(m.variance(j)));
    const double a = normal(rng);
    const double b = normal(rng);
    v.set_pair(j, a, b);
  }
  return v;
}

BirkhoffState rotate(const BirkhoffState& v, const AngleVector& theta) {
  if (theta.n_modes() < v.n_modes()) throw std::invalid_argument("rotate: fewer angles than modes");
  BirkhoffState out = v;
  for (int j = 1; j <= v.n_modes(); ++j) {
    const auto [a, b] = v.pair(j);
    const double c = std::cos(theta.angles[j - 1]);
    const double s = std::sin(theta.angles[j - 1]);
    out.set_pair(j, c * a - s * b, s * a + c * b);
  }
  return out;
}

double log_density(const MeasureSpec& m, const BirkhoffState& v) {
  double s = 0.0;
  for (int j = 1; j <= m.n_modes(); ++j) {
    const auto [a, b] = v.pair(j);
    const double var = m.variance(j);
    s -= std::log(2.0 * std::numbers::pi * var) + (a * a + b * b) / (2.0 * var);
  }
  return s;
}

BirkhoffState pushforward_field(const BirkhoffState& v, const PerturbationSpec& f, int grid_size) {
  const SpectralField u = linear_birkhoff_inverse(v, grid_size);
  BirkhoffState X = linear_birkhoff(f.evaluate(u), v.p());
  return X;
}

double field_divergence(const BirkhoffState& v, const PerturbationSpec& f, double fd_step) {
  double div = 0.0;
  for (int j = 1; j <= v.n_modes(); ++j) div += 2.0 * f.diagonal_rate(j);
  if (!f.has_nonlinear_part()) return div;
  // Non-diagonal part by central differences, component by component.
  div = 0.0;
  BirkhoffState w = v;
  auto comps = w.pairs();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const double x = comps[c];
    const double h = fd_step * std::max(1.0, std::abs(x));
    comps[c] = x + h;
    const double up = pushforward_field(w, f).pairs()[c];
    comps[c] = x - h;
    const double dn = pushforward_field(w, f).pairs()[c];
    comps[c] = x;
    div += (up - dn) / (2.0 * h);
  }
  return div;
}

namespace {

double grad_log_b_dot(const BirkhoffState& v, std::span<const double> X, const MeasureSpec& m) {
  double s = 0.0;
  const auto z = v.pairs();
  for (int j = 1; j <= v.n_modes(); ++j) {
    s -= (z[2 * (j - 1)] * X[2 * (j - 1)] + z[2 * (j - 1) + 1] * X[2 * (j - 1) + 1]) / m.variance(j);
  }
  return s;
}

}  // namespace

double cn_divergence(const BirkhoffState& v, const PerturbationSpec& f, const MeasureSpec& m, double fd_step) {
  if (v.n_modes() > m.n_modes()) throw std::invalid_argument("cn_divergence: state has more modes than measure");
  const BirkhoffState X = pushforward_field(v, f);
  return field_divergence(v, f, fd_step) + grad_log_b_dot(v, X.pairs(), m);
}

double rotation_cn(const BirkhoffState& v, const MeasureSpec& m, double eps) {
  // Pair (a, b) -> (W / eps) (-b, a): d(-W b / eps)/da + d(W a / eps)/db = 0.
  double div = 0.0;
  std::vector<double> R(v.pairs().size());
  for (int j = 1; j <= v.n_modes(); ++j) {
    const auto [a, b] = v.pair(j);
    const double w = rotation_speed(j) / eps;
    R[2 * (j - 1)] = -w * b;
    R[2 * (j - 1) + 1] = w * a;
  }
  double scale = 0.0;
  for (int j = 1; j <= v.n_modes(); ++j) {
    const auto [a, b] = v.pair(j);
    scale += std::abs(a * R[2 * (j - 1)]) / m.variance(j) + std::abs(b * R[2 * (j - 1) + 1]) / m.variance(j);
  }
  const double g = grad_log_b_dot(v, R, m);
  return div + (scale > 0.0 ? g / scale : 0.0);
}

BirkhoffState qi_flow(const BirkhoffState& v0, const PerturbationSpec& f, const MeasureSpec& m, double eps,
                      double tau, const QiOptions& opts, std::vector<DensityRecord>* records,
                      double* div_integral) {
  if (!(eps > 0.0)) throw std::invalid_argument("qi_flow: eps must be positive");
  const int n = v0.n_modes();
  if (n > m.n_modes()) throw std::invalid_argument("qi_flow: state has more modes than measure");
  const bool nonlinear = f.has_nonlinear_part();
  const int grid = dealiased_grid_size(n);

  // Remainder X0 (+ nonlinear part); diagonal damping goes into the factor.
  const SpectralField prof = f.profile().resized(n, grid);
  const BirkhoffState X0 = linear_birkhoff(prof, v0.p());
  int fastest = 0;
  for (int j = 1; j <= n; ++j) {
    const auto [a, b] = X0.pair(j);
    if (nonlinear || a != 0.0 || b != 0.0) fastest = j;
  }
  const int per_record = std::max(1, opts.record_points);
  long steps = per_record;
  if (fastest > 0) {
    const double h_max = opts.step_fraction * eps / rotation_speed(fastest);
    steps = static_cast<long>(std::ceil(std::abs(tau) / h_max));
    steps = std::max<long>(per_record, (steps + per_record - 1) / per_record * per_record);
  }
  const double h = tau / static_cast<double>(steps);
  const long record_stride = steps / per_record;

  std::vector<cplx> half(static_cast<std::size_t>(n));
  std::vector<double> rate(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    rate[j - 1] = f.diagonal_rate(j);
    half[j - 1] = std::exp(cplx(rate[j - 1], rotation_speed(j) / eps) * (0.5 * h));
  }
  double div_const = 0.0;
  for (int j = 1; j <= n; ++j) div_const += 2.0 * rate[j - 1];

  PerturbationSpec f_nl = f;
  BirkhoffState work(n, v0.p());
  std::vector<double> X(2 * static_cast<std::size_t>(n));
  // Remainder N(z) and the scalar rates (c^n, div X) at state z.
  auto eval = [&](const std::vector<cplx>& z, std::vector<cplx>& out, double& cn, double& div) {
    auto wp = work.pairs();
    for (int j = 0; j < n; ++j) {
      wp[2 * j] = z[j].real();
      wp[2 * j + 1] = z[j].imag();
    }
    if (nonlinear) {
      const BirkhoffState full = pushforward_field(work, f_nl, grid);
      std::copy(full.pairs().begin(), full.pairs().end(), X.begin());
      div = field_divergence(work, f_nl, opts.fd_step);
    } else {
      for (int j = 0; j < n; ++j) {
        X[2 * j] = X0.pairs()[2 * j] + rate[j] * wp[2 * j];
        X[2 * j + 1] = X0.pairs()[2 * j + 1] + rate[j] * wp[2 * j + 1];
      }
      div = div_const;
    }
    cn = div + grad_log_b_dot(work, X, m);
    for (int j = 0; j < n; ++j) out[j] = cplx(X[2 * j] - rate[j] * wp[2 * j], X[2 * j + 1] - rate[j] * wp[2 * j + 1]);
  };

  std::vector<cplx> z(static_cast<std::size_t>(n)), k1(z), k2(z), k3(z), k4(z), tmp(z), ez(z);
  for (int j = 0; j < n; ++j) z[j] = cplx(v0.pairs()[2 * j], v0.pairs()[2 * j + 1]);
  double A = 0.0, D = 0.0;

  auto record = [&](double t) {
    if (!records) return;
    BirkhoffState v(n, v0.p());
    for (int j = 0; j < n; ++j) v.set_pair(j + 1, z[j].real(), z[j].imag());
    std::vector<cplx> scratch(static_cast<std::size_t>(n));
    double cn = 0.0, div = 0.0;
    eval(z, scratch, cn, div);
    records->push_back({t, log_density(m, v), cn, A});
  };
  record(0.0);

  for (long s = 0; s < steps; ++s) {
    double c1, c2, c3, c4, d1, d2, d3, d4;
    eval(z, k1, c1, d1);
    for (int j = 0; j < n; ++j) tmp[j] = half[j] * (z[j] + 0.5 * h * k1[j]);
    eval(tmp, k2, c2, d2);
    for (int j = 0; j < n; ++j) {
      ez[j] = half[j] * z[j];
      tmp[j] = ez[j] + 0.5 * h * k2[j];
    }
    eval(tmp, k3, c3, d3);
    for (int j = 0; j < n; ++j) tmp[j] = half[j] * (ez[j] + h * k3[j]);
    eval(tmp, k4, c4, d4);
    for (int j = 0; j < n; ++j) {
      z[j] = half[j] * (half[j] * (z[j] + (h / 6.0) * k1[j]) + (h / 3.0) * (k2[j] + k3[j])) + (h / 6.0) * k4[j];
    }
    A += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    D += h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    if ((s + 1) % record_stride == 0) record(h * static_cast<double>(s + 1));
  }
  if (div_integral) *div_integral = D;

  BirkhoffState out(n, v0.p());
  for (int j = 0; j < n; ++j) out.set_pair(j + 1, z[j].real(), z[j].imag());
  return out;
}

QiReport quasi_invariance_probe(const MeasureSpec& m, const PerturbationSpec& f, double eps, double tau_end,
                                int ensemble_size, std::uint64_t seed, const QiOptions& opts) {
  if (ensemble_size < 1) throw std::invalid_argument("ensemble_size must be >= 1");
  if (m.n_modes() > 8) throw std::invalid_argument("quasi-invariance probe is limited to n <= 8 modes");
  if (!(tau_end > 0.0)) throw std::invalid_argument("tau_end must be positive");
  QiReport rep;
  rep.n_modes = m.n_modes();
  rep.eps = eps;
  rep.tau_end = tau_end;
  rep.members.resize(static_cast<std::size_t>(ensemble_size));

  std::vector<double> rot(rep.members.size(), 0.0);
  parallel_for(rep.members.size(), [&](std::size_t i) {
    const BirkhoffState v0 = sample(m, seed, i);
    QiMemberReport& r = rep.members[i];
    double D = 0.0;
    qi_flow(v0, f, m, eps, tau_end, opts, &r.records, &D);
    for (const auto& rec : r.records) {
      r.max_abs_cn = std::max(r.max_abs_cn, std::abs(rec.cn));
      r.max_abs_A = std::max(r.max_abs_A, std::abs(rec.A));
    }
    const auto& first = r.records.front();
    const auto& last = r.records.back();
    r.identity_residual = std::abs(last.log_b - first.log_b + D - last.A);
    rot[i] = std::abs(rotation_cn(v0, m, eps));
  });

  for (std::size_t i = 0; i < rep.members.size(); ++i) {
    const auto& r = rep.members[i];
    rep.c_hat_tau = std::max(rep.c_hat_tau, r.max_abs_A);
    rep.max_abs_cn = std::max(rep.max_abs_cn, r.max_abs_cn);
    rep.identity_residual = std::max(rep.identity_residual, r.identity_residual);
    rep.rotation_residual = std::max(rep.rotation_residual, rot[i]);
  }
  rep.identity_ok = rep.identity_residual <= opts.identity_tol * std::max(1.0, rep.c_hat_tau);

  if (opts.ball_samples > 0) {
    BallTest& b = rep.ball;
    b.samples = opts.ball_samples;
    // Radius: median |v|_p of an independent pilot draw, so mu(B) ~ 1/2.
    std::vector<double> pilot(static_cast<std::size_t>(opts.ball_samples));
    for (std::size_t i = 0; i < pilot.size(); ++i) pilot[i] = sample(m, seed, derive_seed(kPilotTag, {i})).norm();
    std::nth_element(pilot.begin(), pilot.begin() + pilot.size() / 2, pilot.end());
    b.radius = pilot[pilot.size() / 2];

    std::vector<char> in0(pilot.size()), in1(pilot.size());
    parallel_for(pilot.size(), [&](std::size_t i) {
      const BirkhoffState v = sample(m, seed, derive_seed(kBallTag, {i}));
      in0[i] = v.norm() <= b.radius;
      in1[i] = qi_flow(v, f, m, eps, -tau_end, opts).norm() <= b.radius;
    });
    int both = 0, only0 = 0, only1 = 0;
    for (std::size_t i = 0; i < pilot.size(); ++i) {
      both += in0[i] && in1[i];
      only0 += in0[i] && !in1[i];
      only1 += !in0[i] && in1[i];
    }
    b.hits_initial = both + only0;
    b.hits_flowed = both + only1;
    if (b.hits_initial > 0 && b.hits_flowed > 0) {
      b.ratio = static_cast<double>(b.hits_flowed) / b.hits_initial;
      // Paired counts: var(log R) ~ (b + c) / (n0 n1).
      const double sd = std::sqrt(static_cast<double>(only0 + only1) /
                                  (static_cast<double>(b.hits_initial) * b.hits_flowed));
      b.ci_lo = b.ratio * std::exp(-1.96 * sd);
      b.ci_hi = b.ratio * std::exp(1.96 * sd);
    } else {
      b.ratio = 0.0;
      b.ci_lo = 0.0;
      b.ci_hi = INFINITY;
    }
    b.bound_lo = std::exp(-rep.c_hat_tau);
    b.bound_hi = std::exp(rep.c_hat_tau);
    b.passed = b.ci_hi >= b.bound_lo && b.ci_lo <= b.bound_hi;
  }
  return rep;
}

}  // namespace kdvlab
