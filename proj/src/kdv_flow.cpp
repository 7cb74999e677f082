#include "kdvlab/kdv_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kdvlab/error.hpp"
#include "kdvlab/fft.hpp"
#include "kdvlab/simd.hpp"

namespace kdvlab {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488016887242097;
// RK4 reaches the imaginary axis at 2 sqrt(2); keep a margin.
constexpr double kRk4ImagLimit = 2.5;

double* as_real(std::vector<std::complex<double>>& v) { return reinterpret_cast<double*>(v.data()); }
const double* as_real(const std::vector<std::complex<double>>& v) {
  return reinterpret_cast<const double*>(v.data());
}

}  // namespace

void FlowParams::validate() const {
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
  if (!(dt != 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be nonzero and finite");
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (galerkin_cutoff < 0) throw std::invalid_argument("galerkin_cutoff must be >= 0");
}

void FlowParams::check_stability(const SpectralField& u) const {
  const auto g = u.to_grid();
  double umax = 0.0;
  for (double x : g) umax = std::max(umax, std::abs(x));
  const double speed = 6.0 * umax * kTwoPi * u.n_modes();
  if (std::abs(dt) * speed > kRk4ImagLimit) {
    throw StepFailure("step " + std::to_string(dt) + " violates the advection stability bound (|dt| * " +
                      std::to_string(speed) + " > " + std::to_string(kRk4ImagLimit) + ")");
  }
}

KdvStepper::KdvStepper(int n_modes, int grid_size, const FlowParams& params, const PerturbationSpec& f)
    : n_(n_modes),
      grid_(grid_size ? grid_size : dealiased_grid_size(n_modes)),
      dt_(params.dt),
      eps_(params.eps),
      cutoff_(params.galerkin_cutoff > 0 ? std::min(params.galerkin_cutoff, n_modes) : n_modes),
      f_(f),
      half_(static_cast<std::size_t>(n_modes)),
      k1_(half_.size()), k2_(half_.size()), k3_(half_.size()), k4_(half_.size()),
      tmp_(half_.size()), ez_(half_.size()), z0_(half_.size()),
      scratch_u_(n_modes, grid_),
      scratch_f_(n_modes, grid_) {
  for (int k = 1; k <= n_; ++k) {
    const double w = std::pow(kTwoPi * k, 3);
    half_[k - 1] = std::polar(1.0, 0.5 * w * dt_);
  }
}

void KdvStepper::rhs(const std::vector<std::complex<double>>& z, std::vector<std::complex<double>>& out) {
  const auto& K = simd::active();
  auto& fft = RealFft::cached(grid_);
  auto spec = fft.spectrum();
  std::fill(spec.begin(), spec.end(), std::complex<double>{});
  for (int k = 1; k <= n_; ++k) spec[k] = z[k - 1] / kSqrt2;
  fft.inverse();
  auto r = fft.real();
  K.square(r.data(), r.data(), r.size());
  fft.forward();
  const double s = kSqrt2 / grid_;
  for (int k = 1; k <= n_; ++k) {
    out[k - 1] = k <= cutoff_ ? std::complex<double>(0.0, 3.0 * kTwoPi * k) * (s * spec[k]) : std::complex<double>{};
  }
  if (eps_ != 0.0 && !f_.is_zero()) {
    std::copy(as_real(z), as_real(z) + 2 * n_, scratch_u_.pairs().begin());
    f_.evaluate_into(scratch_u_, scratch_f_);
    auto fz = scratch_f_.pairs();
    std::fill(fz.begin() + 2 * cutoff_, fz.end(), 0.0);
    K.axpy(as_real(out), as_real(out), eps_, fz.data(), 2 * static_cast<std::size_t>(n_));
  }
}

void KdvStepper::advance(SpectralField& u, double t) {
  if (u.n_modes() != n_) throw std::invalid_argument("stepper/field mode count mismatch");
  const auto& K = simd::active();
  const std::size_t m = 2 * static_cast<std::size_t>(n_);
  auto* zu = reinterpret_cast<std::complex<double>*>(u.pairs().data());
  std::vector<std::complex<double>>& z = ez_;
  const std::vector<std::complex<double>>& z0 = z0_;
  std::copy(zu, zu + n_, z0_.begin());

  // k1 = N(z)
  rhs(z0, k1_);
  // k2 = N(E (z + dt/2 k1))
  K.axpy(as_real(tmp_), as_real(z0), 0.5 * dt_, as_real(k1_), m);
  K.cmul(tmp_.data(), tmp_.data(), half_.data(), n_);
  rhs(tmp_, k2_);
  // k3 = N(E z + dt/2 k2)
  K.cmul(z.data(), z0.data(), half_.data(), n_);
  K.axpy(as_real(tmp_), as_real(z), 0.5 * dt_, as_real(k2_), m);
  rhs(tmp_, k3_);
  // k4 = N(E (E z + dt k3))
  K.axpy(as_real(tmp_), as_real(z), dt_, as_real(k3_), m);
  K.cmul(tmp_.data(), tmp_.data(), half_.data(), n_);
  rhs(tmp_, k4_);
  // z' = E (E (z + dt/6 k1) + dt/3 (k2 + k3)) + dt/6 k4
  K.axpy(as_real(tmp_), as_real(z0), dt_ / 6.0, as_real(k1_), m);
  K.cmul(tmp_.data(), tmp_.data(), half_.data(), n_);
  K.axpy(as_real(tmp_), as_real(tmp_), dt_ / 3.0, as_real(k2_), m);
  K.axpy(as_real(tmp_), as_real(tmp_), dt_ / 3.0, as_real(k3_), m);
  K.cmul(tmp_.data(), tmp_.data(), half_.data(), n_);
  K.axpy(as_real(tmp_), as_real(tmp_), dt_ / 6.0, as_real(k4_), m);

  for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i) {
    if (!std::isfinite(tmp_[i].real()) || !std::isfinite(tmp_[i].imag())) {
      throw IntegrationBlowup(t + dt_, "non-finite coefficient in mode " + std::to_string(i + 1));
    }
  }
  std::copy(tmp_.begin(), tmp_.end(), zu);
}

SpectralField step(const SpectralField& u, const FlowParams& params, const PerturbationSpec& f) {
  params.validate();
  params.check_stability(u);
  KdvStepper stepper(u.n_modes(), u.grid_size(), params, f);
  SpectralField out = u;
  stepper.advance(out);
  return out;
}

Trajectory integrate(const SpectralField& u0, const FlowParams& params, const PerturbationSpec& f, double t_start) {
  params.validate();
  const double horizon = params.safety_horizon * std::max(1.0, params.eps > 0.0 ? 1.0 / params.eps : 1.0);
  if (params.t_end > horizon * (1.0 + 1e-12)) {
    throw HorizonExceeded("t_end=" + std::to_string(params.t_end) + " exceeds the safety horizon " +
                          std::to_string(horizon));
  }
  params.check_stability(u0);

  const long steps = std::lround(params.t_end / std::abs(params.dt));
  if (steps < 1) throw std::invalid_argument("t_end shorter than one step");

  const double scale = std::max(sobolev_norm(u0, params.norm_p),
                                params.eps * params.t_end * sobolev_norm(f.evaluate(u0), params.norm_p));
  const double ceiling = params.norm_ceiling_factor * scale;

  Trajectory traj;
  traj.eps = params.eps;
  traj.times.reserve(static_cast<std::size_t>(steps / params.record_every + 2));
  traj.states.reserve(traj.times.capacity());
  traj.times.push_back(t_start);
  traj.states.push_back(u0);

  KdvStepper stepper(u0.n_modes(), u0.grid_size(), params, f);
  SpectralField u = u0;
  for (long i = 1; i <= steps; ++i) {
    const double t = t_start + static_cast<double>(i - 1) * params.dt;
    stepper.advance(u, t);
    if (i % params.record_every == 0 || i == steps) {
      const double tn = t_start + static_cast<double>(i) * params.dt;
      if (scale > 0.0) {
        const double norm = sobolev_norm(u, params.norm_p);
        if (!(norm <= ceiling)) {
          throw IntegrationBlowup(tn, "||u||_p=" + std::to_string(norm) + " exceeds ceiling " + std::to_string(ceiling));
        }
      }
      traj.times.push_back(tn);
      traj.states.push_back(u);
    }
  }
  return traj;
}

SpectralField galerkin_truncate(const SpectralField& u, int n) {
  if (n < 1) throw std::invalid_argument("galerkin_truncate: n must be >= 1");
  SpectralField out = u;
  auto p = out.pairs();
  if (n < u.n_modes()) std::fill(p.begin() + 2 * n, p.end(), 0.0);
  return out;
}

std::vector<double> galerkin_convergence_probe(const SpectralField& u0, const FlowParams& params,
                                               const PerturbationSpec& f, const std::vector<int>& n_list) {
  if (n_list.empty()) throw std::invalid_argument("n_list is empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw std::invalid_argument("n_list must be increasing");
  }
  if (n_list.back() > u0.n_modes()) throw std::invalid_argument("n_list exceeds the field's modes");

  auto run = [&](int n) {
    FlowParams p = params;
    p.galerkin_cutoff = n;
    return integrate(galerkin_truncate(u0, n), p, f);
  };
  const Trajectory ref = run(n_list.back());
  std::vector<double> dev;
  dev.reserve(n_list.size());
  for (int n : n_list) {
    if (n == n_list.back()) {
      dev.push_back(0.0);
      continue;
    }
    const Trajectory tr = run(n);
    double sup = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      sup = std::max(sup, sobolev_norm(tr.states[i] - ref.states[i], params.norm_p));
    }
    dev.push_back(sup);
  }
  return dev;
}

FrequencyVector estimate_frequencies(const SpectralField& u0, double T, int k_max, const FrequencyOptions& opts) {
  if (k_max < 1 || k_max > u0.n_modes()) throw std::invalid_argument("k_max out of range");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  const ActionVector I0 = linear_actions(u0);
  for (int k = 1; k <= k_max; ++k) {
    if (!(I0(k) > opts.action_threshold)) throw ActionBelowThreshold(k, I0(k));
  }

  FlowParams params;
  params.eps = 0.0;
  params.dt = opts.dt;
  params.t_end = T;
  params.validate();
  params.check_stability(u0);
  const long steps = std::lround(T / opts.dt);
  KdvStepper stepper(u0.n_modes(), u0.grid_size(), params, PerturbationSpec::none(u0.n_modes()));

  std::vector<double> ts;
  std::vector<std::vector<double>> phase(static_cast<std::size_t>(k_max));
  auto sample = [&](const SpectralField& u, double t) {
    ts.push_back(t);
    const auto z = u.modes();
    for (int k = 0; k < k_max; ++k) {
      const double a = std::arg(z[k]);
      auto& ph = phase[k];
      if (ph.empty()) {
        ph.push_back(a);
      } else {
        // unwrap against the previous sample
        double d = a - std::remainder(ph.back(), 2.0 * std::numbers::pi);
        d = std::remainder(d, 2.0 * std::numbers::pi);
        ph.push_back(ph.back() + d);
      }
    }
  };

  SpectralField u = u0;
  sample(u, 0.0);
  for (long i = 1; i <= steps; ++i) {
    stepper.advance(u, (i - 1) * opts.dt);
    if (i % opts.sample_every == 0 || i == steps) sample(u, i * opts.dt);
  }

  // Unwrapping needs |W_k| * dt * sample_every < pi; the fitted slope is
  // only meaningful under that sampling condition.
  FrequencyVector out;
  const double n = static_cast<double>(ts.size());
  double tm = 0.0;
  for (double t : ts) tm += t;
  tm /= n;
  double stt = 0.0;
  for (double t : ts) stt += (t - tm) * (t - tm);
  for (int k = 0; k < k_max; ++k) {
    const auto& ph = phase[k];
    double pm = 0.0;
    for (double p : ph) pm += p;
    pm /= n;
    double stp = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) stp += (ts[i] - tm) * (ph[i] - pm);
    const double slope = stp / stt;
    double rss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double r = ph[i] - (pm + slope * (ts[i] - tm));
      rss += r * r;
    }
    out.freqs.push_back(slope);
    out.residuals.push_back(std::sqrt(rss / n) / T);
  }
  return out;
}

}  // namespace kdvlab
