#include "kdvlab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "kdvlab/error.hpp"
#include "kdvlab/gaussian_measure.hpp"
#include "kdvlab/parallel.hpp"
#include "kdvlab/rng.hpp"

namespace kdvlab {

namespace {

constexpr double kPi = std::numbers::pi;

double frac(double x) { return x - std::floor(x); }

double bernoulli2(double x) { return x * x - x + 1.0 / 6.0; }

std::vector<int> korobov_vector(int M, int N, int a) {
  std::vector<int> z(static_cast<std::size_t>(N));
  long long g = 1;
  for (int k = 0; k < N; ++k) {
    z[k] = static_cast<int>(g);
    g = (g * a) % M;
  }
  return z;
}

double mean_of(std::span<const double> x) { return pairwise_sum(x) / static_cast<double>(x.size()); }

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = (x[i] - m) * (x[i] - m);
  return std::sqrt(pairwise_sum(d) / static_cast<double>(x.size() - 1));
}

}  // namespace

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

QuadScheme parse_quad_scheme(std::string_view id) {
  if (id == "monte_carlo") return QuadScheme::monte_carlo;
  if (id == "lattice_qmc") return QuadScheme::lattice_qmc;
  throw std::invalid_argument("unknown quadrature scheme '" + std::string(id) + "'");
}

ActionBackend parse_backend(std::string_view id) {
  if (id == "linear") return ActionBackend::linear;
  if (id == "hill") return ActionBackend::hill;
  throw std::invalid_argument("unknown action backend '" + std::string(id) + "'");
}

std::string_view to_string(QuadScheme s) { return s == QuadScheme::monte_carlo ? "monte_carlo" : "lattice_qmc"; }
std::string_view to_string(ActionBackend b) { return b == ActionBackend::linear ? "linear" : "hill"; }

void AveragingConfig::validate() const {
  if (N_angles < 1) throw std::invalid_argument("N_angles must be >= 1");
  if (M_samples < 16) throw std::invalid_argument("M_samples must be >= 16");
  if (!(fd_step > 0.0 && fd_step <= 1e-2)) throw std::invalid_argument("fd_step must lie in (0, 1e-2]");
  if (scheme == QuadScheme::lattice_qmc && lattice_shifts < 2) {
    throw std::invalid_argument("lattice_shifts must be >= 2 for a standard error");
  }
  if (korobov_a < 0 || korobov_a >= M_samples) throw std::invalid_argument("korobov_a must lie in [0, M_samples)");
}

std::vector<double> backend_actions(const SpectralField& u, int n, ActionBackend backend, const HillOptions& hill) {
  if (backend == ActionBackend::hill) {
    const ActionVector I = hill_actions(u, n, SobolevIndex(0.0), hill);
    return {I.values().begin(), I.values().end()};
  }
  const ActionVector I = linear_actions(u);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  std::copy_n(I.values().begin(), std::min<std::size_t>(out.size(), I.values().size()), out.begin());
  return out;
}

std::vector<double> slow_field_F(const SpectralField& u, const PerturbationSpec& f, const AveragingConfig& cfg) {
  const int n = cfg.backend == ActionBackend::hill ? std::min(u.n_modes(), cfg.hill.max_gaps) : u.n_modes();
  const SpectralField fu = f.evaluate(u);
  const double nf = sobolev_norm(fu, SobolevIndex(0.0));
  if (nf == 0.0) return std::vector<double>(static_cast<std::size_t>(n), 0.0);
  const double nu = sobolev_norm(u, SobolevIndex(0.0));
  const double h = nu > 1e-300 ? cfg.fd_step * nu / std::max(nf, 1.0) : cfg.fd_step;
  SpectralField up = u;
  up.axpy(h, fu);
  SpectralField dn = u;
  dn.axpy(-h, fu);
  const auto Ip = backend_actions(up, n, cfg.backend, cfg.hill);
  const auto Im = backend_actions(dn, n, cfg.backend, cfg.hill);
  std::vector<double> F(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) F[k] = (Ip[k] - Im[k]) / (2.0 * h);
  return F;
}

std::vector<double> slow_field_linear(const SpectralField& u, const PerturbationSpec& f) {
  const BirkhoffState v = linear_birkhoff(u);
  const BirkhoffState x = linear_birkhoff(f.evaluate(u));
  std::vector<double> F(static_cast<std::size_t>(u.n_modes()));
  for (int k = 1; k <= u.n_modes(); ++k) {
    const auto [a, b] = v.pair(k);
    const auto [c, d] = x.pair(k);
    F[k - 1] = a * c + b * d;
  }
  return F;
}

int korobov_generator(int M, int N) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, int> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({M, N}); it != cache.end()) return it->second;
  }
  int best = 1;
  double best_p2 = INFINITY;
  for (int a = 1; a < M; ++a) {
    if (std::gcd(a, M) != 1) continue;
    const auto z = korobov_vector(M, N, a);
    double s = 0.0;
    for (int i = 0; i < M; ++i) {
      double prod = 1.0;
      for (int k = 0; k < N; ++k) {
        prod *= 1.0 + 2.0 * kPi * kPi * bernoulli2(frac(static_cast<double>(static_cast<long long>(i) * z[k] % M) / M));
      }
      s += prod;
    }
    const double p2 = s / M - 1.0;
    if (p2 < best_p2) {
      best_p2 = p2;
      best = a;
    }
  }
  std::lock_guard lock(mu);
  cache[{M, N}] = best;
  return best;
}

VectorEstimate average_first_N(const std::function<std::vector<double>(const BirkhoffState&)>& g,
                               const BirkhoffState& v, const AveragingConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int N = std::min(cfg.N_angles, v.n_modes());
  const int M = cfg.M_samples;
  const bool lattice = cfg.scheme == QuadScheme::lattice_qmc;
  const int groups = lattice ? cfg.lattice_shifts : 1;
  const std::size_t total = static_cast<std::size_t>(groups) * M;

  std::vector<int> z;
  std::vector<std::vector<double>> shifts;
  if (lattice) {
    z = korobov_vector(M, N, cfg.korobov_a > 0 ? cfg.korobov_a : korobov_generator(M, N));
    for (int r = 0; r < groups; ++r) {
      Stream rng = make_stream(seed, {0x5A1F7ull, static_cast<std::uint64_t>(r)});
      std::vector<double> s(static_cast<std::size_t>(N));
      for (double& x : s) x = uniform01(rng);
      shifts.push_back(std::move(s));
    }
  }

  std::vector<std::vector<double>> vals(total);
  parallel_for(total, [&](std::size_t idx) {
    AngleVector theta = AngleVector::zeros(v.n_modes());
    if (lattice) {
      const int r = static_cast<int>(idx / M);
      const long long i = static_cast<long long>(idx % M);
      for (int k = 0; k < N; ++k) {
        theta.angles[k] = 2.0 * kPi * frac(static_cast<double>(i * z[k] % M) / M + shifts[r][k]);
      }
    } else {
      Stream rng = make_stream(seed, {0x3C3Cull, idx});
      for (int k = 0; k < N; ++k) theta.angles[k] = 2.0 * kPi * uniform01(rng);
    }
    vals[idx] = g(rotate(v, theta));
  });

  const std::size_t dim = vals.front().size();
  VectorEstimate out;
  out.value.assign(dim, 0.0);
  out.stderr_.assign(dim, 0.0);
  std::vector<double> col(total), group_means(static_cast<std::size_t>(groups));
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t i = 0; i < total; ++i) col[i] = vals[i].at(c);
    if (lattice) {
      for (int r = 0; r < groups; ++r) group_means[r] = mean_of(std::span<const double>(col).subspan(r * M, M));
      out.value[c] = mean_of(group_means);
      out.stderr_[c] = sample_sd(group_means) / std::sqrt(static_cast<double>(groups));
    } else {
      out.value[c] = mean_of(col);
      out.stderr_[c] = sample_sd(col) / std::sqrt(static_cast<double>(total));
    }
  }
  return out;
}

Estimate average_first_N(const std::function<double(const BirkhoffState&)>& g, const BirkhoffState& v,
                         const AveragingConfig& cfg, std::uint64_t seed) {
  const VectorEstimate e = average_first_N(
      std::function<std::vector<double>(const BirkhoffState&)>([&](const BirkhoffState& w) {
        return std::vector<double>{g(w)};
      }),
      v, cfg, seed);
  return {e.value[0], e.stderr_[0]};
}

VectorEstimate averaged_field(const ActionVector& J, const PerturbationSpec& f, const AveragingConfig& cfg,
                              std::uint64_t seed, int grid_size) {
  const int n = J.n_modes();
  std::vector<double> JN(J.values().begin(), J.values().end());
  for (int k = cfg.N_angles; k < n; ++k) JN[k] = 0.0;
  bool zero = true;
  for (double x : JN) zero = zero && x == 0.0;
  if (zero && cfg.backend == ActionBackend::linear) {
    // Actions are quadratic at the origin: every rate vanishes.
    return {std::vector<double>(static_cast<std::size_t>(n), 0.0), std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  }
  const BirkhoffState base = assemble(ActionVector(std::move(JN), J.p()), AngleVector::zeros(n));
  const int grid = grid_size > 0 ? grid_size : dealiased_grid_size(n);
  auto g = [&](const BirkhoffState& v) { return slow_field_F(linear_birkhoff_inverse(v, grid), f, cfg); };
  return average_first_N(std::function<std::vector<double>(const BirkhoffState&)>(g), base, cfg, seed);
}

std::vector<double> AveragedTrajectory::at(double tau) const {
  if (taus.empty()) throw RangeMismatch("empty averaged trajectory");
  const double span = taus.back() - taus.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  if (tau < taus.front() - slack || tau > taus.back() + slack) {
    throw RangeMismatch("tau=" + std::to_string(tau) + " outside averaged range [" + std::to_string(taus.front()) +
                        ", " + std::to_string(taus.back()) + "]");
  }
  if (taus.size() == 1) return {J[0].values().begin(), J[0].values().end()};
  tau = std::clamp(tau, taus.front(), taus.back());
  std::size_t i = static_cast<std::size_t>(std::upper_bound(taus.begin(), taus.end(), tau) - taus.begin());
  i = std::clamp<std::size_t>(i, 1, taus.size() - 1) - 1;
  const double h = taus[i + 1] - taus[i];
  const double s = (tau - taus[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  const auto a = J[i].values();
  const auto b = J[i + 1].values();
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    out[k] = h00 * a[k] + h10 * h * rates[i][k] + h01 * b[k] + h11 * h * rates[i + 1][k];
  }
  return out;
}

double empirical_lipschitz(const ActionVector& J, const PerturbationSpec& f, const AveragingConfig& cfg,
                           std::uint64_t seed, int probes, int grid_size) {
  const VectorEstimate F0 = averaged_field(J, f, cfg, seed, grid_size);
  const double Jn = J.norm();
  double L = 0.0;
  for (int r = 0; r < probes; ++r) {
    Stream rng = make_stream(seed, {0x11Bull, static_cast<std::uint64_t>(r)});
    std::vector<double> Jp(J.values().begin(), J.values().end());
    for (std::size_t k = 0; k < Jp.size(); ++k) {
      const double d = 2.0 * uniform01(rng) - 1.0;
      Jp[k] = Jn > 0.0 ? Jp[k] * (1.0 + 0.05 * d) : 1e-8 * (1.0 + d);
    }
    const double dJ = action_distance(Jp, J.values(), J.p());
    if (dJ == 0.0) continue;
    const VectorEstimate F1 = averaged_field(ActionVector(Jp, J.p()), f, cfg, seed, grid_size);
    L = std::max(L, action_distance(F1.value, F0.value, J.p()) / dJ);
  }
  return L;
}

AveragedTrajectory integrate_averaged(const ActionVector& J0, double T_slow, const PerturbationSpec& f,
                                      const AveragingConfig& cfg, std::uint64_t seed,
                                      const AveragedOptions& opts, int grid_size) {
  if (!(T_slow > 0.0)) throw std::invalid_argument("T_slow must be positive");
  cfg.validate();
  AveragedTrajectory out;
  out.lipschitz = empirical_lipschitz(J0, f, cfg, seed, opts.lipschitz_probes, grid_size);
  double h = T_slow / std::max(1, opts.min_steps);
  if (opts.fixed_step > 0.0) {
    h = opts.fixed_step;
  } else if (out.lipschitz > 0.0) {
    h = std::min(h, opts.lipschitz_step / out.lipschitz);
  }
  const long steps = static_cast<long>(std::ceil(T_slow / h - 1e-9));
  h = T_slow / static_cast<double>(steps);
  out.step = h;

  const SobolevIndex p = J0.p();
  auto clip_copy = [](std::vector<double> x) {
    for (double& v : x) v = std::max(v, 0.0);
    return x;
  };
  auto rate = [&](const std::vector<double>& J, double* noise) {
    const VectorEstimate e = averaged_field(ActionVector(clip_copy(J), p), f, cfg, seed, grid_size);
    if (noise) *noise = e.stderr_.empty() ? 0.0 : *std::max_element(e.stderr_.begin(), e.stderr_.end());
    return e.value;
  };

  std::vector<double> J(J0.values().begin(), J0.values().end());
  double noise = 0.0;
  std::vector<double> r = rate(J, &noise);
  out.taus.push_back(0.0);
  out.J.emplace_back(J, p);
  out.rates.push_back(r);
  out.field_noise.push_back(noise);

  const std::size_t n = J.size();
  std::vector<double> tmp(n), k2, k3, k4;
  for (long s = 0; s < steps; ++s) {
    for (std::size_t k = 0; k < n; ++k) tmp[k] = J[k] + 0.5 * h * r[k];
    k2 = rate(tmp, nullptr);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = J[k] + 0.5 * h * k2[k];
    k3 = rate(tmp, nullptr);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = J[k] + h * k3[k];
    k4 = rate(tmp, nullptr);
    for (std::size_t k = 0; k < n; ++k) J[k] += h / 6.0 * (r[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);

    double clipped = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (J[k] >= 0.0) continue;
      if (J[k] < -opts.clip_floor) ++out.clip_events;
      clipped += 2.0 * std::pow(kTwoPi * static_cast<double>(k + 1), 2.0 * p.value() + 1.0) * -J[k];
      J[k] = 0.0;
    }
    const ActionVector Jv(J, p);
    if (clipped > opts.clip_abort * Jv.norm()) {
      throw StepFailure("averaged equation: clipping " + std::to_string(clipped) + " exceeds " +
                        std::to_string(opts.clip_abort) + " of |J|_p at tau=" + std::to_string(h * (s + 1)));
    }
    r = rate(J, &noise);
    out.taus.push_back(h * static_cast<double>(s + 1));
    out.J.push_back(Jv);
    out.rates.push_back(r);
    out.field_noise.push_back(noise);
  }
  return out;
}

double TrigPolynomial::operator()(std::span<const double> x) const {
  double s = 0.0;
  for (const Term& t : terms) {
    double arg = 0.0;
    for (std::size_t i = 0; i < t.k.size(); ++i) arg += t.k[i] * x[i];
    s += t.a * std::cos(arg) + t.b * std::sin(arg);
  }
  return s;
}

double TrigPolynomial::mean() const {
  double s = 0.0;
  for (const Term& t : terms) {
    if (std::all_of(t.k.begin(), t.k.end(), [](int k) { return k == 0; })) s += t.a;
  }
  return s;
}

double TrigPolynomial::error_bound(std::span<const double> omega, double T) const {
  double s = 0.0;
  for (const Term& t : terms) {
    double kw = 0.0;
    for (std::size_t i = 0; i < t.k.size(); ++i) kw += t.k[i] * omega[i];
    if (std::all_of(t.k.begin(), t.k.end(), [](int k) { return k == 0; })) continue;
    s += 2.0 * std::hypot(t.a, t.b) / (T * std::abs(kw));
  }
  return s;
}

int TrigPolynomial::order() const {
  int o = 0;
  for (const Term& t : terms) {
    for (int k : t.k) o = std::max(o, std::abs(k));
  }
  return o;
}

namespace {

// Visits every k in {-order..order}^n with first nonzero entry positive.
template <class Fn>
void for_each_harmonic(int n, int order, Fn&& fn) {
  std::vector<int> k(static_cast<std::size_t>(n), -order);
  while (true) {
    int first = 0;
    for (int x : k) {
      if (x != 0) {
        first = x;
        break;
      }
    }
    if (first > 0 && !fn(k)) return;
    int i = n - 1;
    while (i >= 0 && k[i] == order) k[i--] = -order;
    if (i < 0) return;
    ++k[i];
  }
}

}  // namespace

double time_average_quasiperiodic(const std::function<double(std::span<const double>)>& g,
                                  std::span<const double> x0, std::span<const double> omega, double T,
                                  const TimeAverageOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (x0.size() != omega.size()) throw std::invalid_argument("x0 and omega differ in dimension");
  const int n = static_cast<int>(omega.size());
  std::vector<int> resonant;
  for_each_harmonic(n, opts.order, [&](const std::vector<int>& k) {
    double kw = 0.0;
    for (int i = 0; i < n; ++i) kw += k[i] * omega[i];
    if (std::abs(kw) <= opts.resonance_tol) {
      resonant = k;
      return false;
    }
    return true;
  });
  if (!resonant.empty()) throw ResonanceDetected(resonant);

  double fastest = 0.0;
  for (double w : omega) fastest += std::abs(w);
  fastest *= std::max(1, opts.order);
  const long panels = std::max<long>(1, static_cast<long>(std::ceil(T * fastest * opts.panels_per_radian)));
  const double len = T / static_cast<double>(panels);
  std::vector<double> x(static_cast<std::size_t>(n));
  auto line = [&](double t) {
    for (int i = 0; i < n; ++i) x[i] = x0[i] + omega[i] * t;
    return g(x);
  };
  std::vector<double> parts(static_cast<std::size_t>(panels));
  for (long p = 0; p < panels; ++p) {
    parts[p] = boost::math::quadrature::gauss<double, 20>::integrate(line, p * len, (p + 1) * len);
  }
  return pairwise_sum(parts) / T;
}

double weyl_sum(const std::vector<AngleVector>& phi_series, std::span<const int> L) {
  if (std::all_of(L.begin(), L.end(), [](int x) { return x == 0; })) {
    throw std::invalid_argument("weyl_sum: L must be nonzero");
  }
  if (phi_series.empty()) return 0.0;
  std::vector<double> re(phi_series.size()), im(phi_series.size());
  for (std::size_t t = 0; t < phi_series.size(); ++t) {
    if (phi_series[t].n_modes() < static_cast<int>(L.size())) throw std::invalid_argument("weyl_sum: too few angles");
    double arg = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i) arg += L[i] * phi_series[t].angles[i];
    re[t] = std::cos(arg);
    im[t] = std::sin(arg);
  }
  const double m = static_cast<double>(phi_series.size());
  return std::min(1.0, std::hypot(pairwise_sum(re) / m, pairwise_sum(im) / m));
}

std::vector<std::vector<int>> weyl_frequencies(int m, int order) {
  std::vector<std::vector<int>> out;
  for_each_harmonic(m, order, [&](const std::vector<int>& k) {
    out.push_back(k);
    return true;
  });
  return out;
}

std::vector<double> action_deviation(const Trajectory& traj, const AveragedTrajectory& avg, SobolevIndex p,
                                     ActionBackend backend, const HillOptions& hill) {
  if (avg.J.empty()) throw RangeMismatch("empty averaged trajectory");
  const int n = avg.J.front().n_modes();
  std::vector<double> out(traj.size());
  parallel_for(traj.size(), [&](std::size_t i) {
    const std::vector<double> J = avg.at(traj.tau(i));
    const std::vector<double> I = backend_actions(traj.states[i], n, backend, hill);
    out[i] = action_distance(I, J, p);
  });
  return out;
}

double compare_actions(const Trajectory& traj, const AveragedTrajectory& avg, SobolevIndex p,
                       ActionBackend backend, const HillOptions& hill) {
  const auto d = action_deviation(traj, avg, p, backend, hill);
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

}  // namespace kdvlab
