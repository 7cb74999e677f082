#include "kdvlab/birkhoff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kdvlab/simd.hpp"

namespace kdvlab {

namespace {

std::vector<double> norm_weights(int n, double p) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) w[j - 1] = std::pow(kTwoPi * j, 2.0 * p + 1.0);
  return w;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  if (a >= 2.0 * std::numbers::pi) a = 0.0;
  return a;
}

}  // namespace

BirkhoffState::BirkhoffState(int n_modes, SobolevIndex p) : pairs_(2 * static_cast<std::size_t>(n_modes), 0.0), p_(p) {
  if (n_modes < 1) throw std::invalid_argument("BirkhoffState needs at least one mode");
}

BirkhoffState BirkhoffState::from_pairs(std::vector<double> pairs, SobolevIndex p) {
  if (pairs.empty() || pairs.size() % 2) throw std::invalid_argument("pair array must have even, nonzero length");
  BirkhoffState v;
  v.pairs_ = std::move(pairs);
  v.p_ = p;
  return v;
}

std::array<double, 2> BirkhoffState::pair(int j) const {
  if (j < 1 || j > n_modes()) throw std::out_of_range("pair index " + std::to_string(j));
  return {pairs_[2 * (j - 1)], pairs_[2 * (j - 1) + 1]};
}

void BirkhoffState::set_pair(int j, double vj, double vmj) {
  if (j < 1 || j > n_modes()) throw std::out_of_range("pair index " + std::to_string(j));
  pairs_[2 * (j - 1)] = vj;
  pairs_[2 * (j - 1) + 1] = vmj;
}

std::span<const std::complex<double>> BirkhoffState::modes() const noexcept {
  return {reinterpret_cast<const std::complex<double>*>(pairs_.data()), pairs_.size() / 2};
}

std::span<std::complex<double>> BirkhoffState::modes() noexcept {
  return {reinterpret_cast<std::complex<double>*>(pairs_.data()), pairs_.size() / 2};
}

double BirkhoffState::norm_sq() const {
  const auto w = norm_weights(n_modes(), p_.value());
  return simd::active().pair_weighted_sumsq(w.data(), pairs_.data(), w.size());
}

double BirkhoffState::norm() const { return std::sqrt(norm_sq()); }

ActionVector::ActionVector(int n_modes, SobolevIndex p) : actions_(static_cast<std::size_t>(n_modes), 0.0), p_(p) {}

ActionVector::ActionVector(std::vector<double> actions, SobolevIndex p) : actions_(std::move(actions)), p_(p) {
  for (std::size_t j = 0; j < actions_.size(); ++j) {
    if (actions_[j] < 0.0) throw std::invalid_argument("negative action I_" + std::to_string(j + 1));
  }
}

double ActionVector::norm() const {
  double s = 0.0;
  for (int j = 1; j <= n_modes(); ++j) s += std::pow(kTwoPi * j, 2.0 * p_.value() + 1.0) * std::abs(actions_[j - 1]);
  return 2.0 * s;
}

double action_distance(std::span<const double> a, std::span<const double> b, SobolevIndex p) {
  const std::size_t n = std::min(a.size(), b.size());
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    s += std::pow(kTwoPi * static_cast<double>(j + 1), 2.0 * p.value() + 1.0) * std::abs(a[j] - b[j]);
  }
  return 2.0 * s;
}

AngleVector AngleVector::zeros(int n) {
  return {std::vector<double>(static_cast<std::size_t>(n), 0.0), std::vector<bool>(static_cast<std::size_t>(n), false)};
}

AngleVector AngleVector::from(std::vector<double> raw) {
  AngleVector a;
  a.near_zero.assign(raw.size(), false);
  for (double& x : raw) x = wrap_angle(x);
  a.angles = std::move(raw);
  return a;
}

BirkhoffState linear_birkhoff(const SpectralField& u, SobolevIndex p) {
  const int n = u.n_modes();
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) w[j - 1] = 1.0 / std::sqrt(kTwoPi * j);
  BirkhoffState v(n, p);
  simd::active().pair_scale(v.pairs().data(), w.data(), u.pairs().data(), w.size());
  return v;
}

SpectralField linear_birkhoff_inverse(const BirkhoffState& v, int grid_size) {
  const int n = v.n_modes();
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) w[j - 1] = std::sqrt(kTwoPi * j);
  SpectralField u(n, grid_size);
  simd::active().pair_scale(u.pairs().data(), w.data(), v.pairs().data(), w.size());
  return u;
}

ActionVector actions(const BirkhoffState& v) {
  ActionVector I(v.n_modes(), v.p());
  const auto z = v.pairs();
  auto out = I.values();
  for (int j = 0; j < v.n_modes(); ++j) out[j] = 0.5 * (z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1]);
  return I;
}

AngleVector angles(const BirkhoffState& v, double zero_threshold) {
  AngleVector a = AngleVector::zeros(v.n_modes());
  for (int j = 1; j <= v.n_modes(); ++j) {
    const auto [x, y] = v.pair(j);
    if (std::hypot(x, y) < zero_threshold) {
      a.near_zero[j - 1] = true;
      continue;
    }
    a.angles[j - 1] = wrap_angle(std::atan2(y, x));
  }
  return a;
}

BirkhoffState assemble(const ActionVector& I, const AngleVector& phi) {
  if (phi.n_modes() < I.n_modes()) throw std::invalid_argument("assemble: fewer angles than actions");
  BirkhoffState v(I.n_modes(), I.p());
  for (int j = 1; j <= I.n_modes(); ++j) {
    const double a = I(j);
    if (a < 0.0) throw std::invalid_argument("assemble: negative action I_" + std::to_string(j));
    const double r = std::sqrt(2.0 * a);
    const double t = phi.angles[j - 1];
    v.set_pair(j, r * std::cos(t), r * std::sin(t));
  }
  return v;
}

ActionVector linear_actions(const SpectralField& u, SobolevIndex p) { return actions(linear_birkhoff(u, p)); }

}  // namespace kdvlab
