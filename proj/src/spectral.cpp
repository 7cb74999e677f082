#include "kdvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kdvlab/fft.hpp"
#include "kdvlab/simd.hpp"

namespace kdvlab {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488016887242097;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_grid(int n_modes, int grid) {
  if (!is_pow2(grid)) throw std::invalid_argument("grid_size must be a power of two");
  if (grid <= 3 * n_modes) {
    throw std::invalid_argument("grid_size " + std::to_string(grid) + " aliases quadratic products of " +
                                std::to_string(n_modes) + " modes (need > 3 n_modes)");
  }
}

void require_same_shape(const SpectralField& a, const SpectralField& b) {
  if (a.n_modes() != b.n_modes()) throw std::invalid_argument("SpectralField mode counts differ");
}

// Fill the FFT spectrum from the pairs; c_k = (u_k + i u_-k) / sqrt(2).
void load_spectrum(RealFft& fft, std::span<const std::complex<double>> z) {
  auto spec = fft.spectrum();
  std::fill(spec.begin(), spec.end(), std::complex<double>{});
  for (std::size_t k = 0; k < z.size(); ++k) spec[k + 1] = z[k] / kSqrt2;
}

// Pairs from the forward spectrum of N samples, modes 1..n.
void store_modes(RealFft& fft, std::span<std::complex<double>> z) {
  const auto spec = fft.spectrum();
  const double s = kSqrt2 / fft.size();
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = s * spec[k + 1];
}

}  // namespace

SobolevIndex::SobolevIndex(double p) : p_(p) {
  if (!(p >= 0.0)) throw std::invalid_argument("Sobolev index must be >= 0");
}

int dealiased_grid_size(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be positive");
  int n = 4;
  while (n <= 3 * n_modes) n *= 2;
  return n;
}

SpectralField::SpectralField(int n_modes, int grid_size)
    : n_modes_(n_modes), grid_size_(grid_size ? grid_size : dealiased_grid_size(n_modes)) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be positive");
  check_grid(n_modes_, grid_size_);
  pairs_.assign(2 * static_cast<std::size_t>(n_modes_), 0.0);
}

SpectralField SpectralField::from_pairs(std::vector<double> pairs, int grid_size) {
  if (pairs.empty() || pairs.size() % 2 != 0) throw std::invalid_argument("pair array must have even, nonzero length");
  SpectralField u(static_cast<int>(pairs.size() / 2), grid_size);
  u.pairs_ = std::move(pairs);
  return u;
}

SpectralField SpectralField::basis(int s, int n_modes, int grid_size) {
  SpectralField u(n_modes, grid_size);
  u.set_coeff(s, 1.0);
  return u;
}

SpectralField SpectralField::from_grid(std::span<const double> values, int n_modes, int grid_size) {
  SpectralField u(n_modes, grid_size);
  const int n = static_cast<int>(values.size());
  if (!is_pow2(n) || n < 2 * n_modes + 2) throw std::invalid_argument("from_grid: sample count too small");
  auto& fft = RealFft::cached(n);
  std::copy(values.begin(), values.end(), fft.real().begin());
  fft.forward();
  store_modes(fft, u.modes());
  return u;
}

double SpectralField::coeff(int s) const {
  if (s == 0 || std::abs(s) > n_modes_) throw std::out_of_range("mode index " + std::to_string(s));
  return pairs_[2 * (std::abs(s) - 1) + (s < 0 ? 1 : 0)];
}

void SpectralField::set_coeff(int s, double value) {
  if (s == 0 || std::abs(s) > n_modes_) throw std::out_of_range("mode index " + std::to_string(s));
  pairs_[2 * (std::abs(s) - 1) + (s < 0 ? 1 : 0)] = value;
}

std::span<const std::complex<double>> SpectralField::modes() const noexcept {
  return {reinterpret_cast<const std::complex<double>*>(pairs_.data()), static_cast<std::size_t>(n_modes_)};
}

std::span<std::complex<double>> SpectralField::modes() noexcept {
  return {reinterpret_cast<std::complex<double>*>(pairs_.data()), static_cast<std::size_t>(n_modes_)};
}

std::vector<double> SpectralField::to_grid() const { return to_grid(grid_size_); }

std::vector<double> SpectralField::to_grid(int points) const {
  if (!is_pow2(points) || points < 2 * n_modes_ + 2) throw std::invalid_argument("to_grid: too few points");
  auto& fft = RealFft::cached(points);
  load_spectrum(fft, modes());
  fft.inverse();
  const auto r = fft.real();
  return {r.begin(), r.end()};
}

SpectralField SpectralField::resized(int n_modes, int grid_size) const {
  SpectralField out(n_modes, grid_size);
  const std::size_t m = 2 * static_cast<std::size_t>(std::min(n_modes, n_modes_));
  std::copy_n(pairs_.begin(), m, out.pairs_.begin());
  return out;
}

SpectralField SpectralField::with_grid(int grid_size) const {
  check_grid(n_modes_, grid_size);
  SpectralField out = *this;
  out.grid_size_ = grid_size;
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) { return axpy(1.0, o); }
SpectralField& SpectralField::operator-=(const SpectralField& o) { return axpy(-1.0, o); }

SpectralField& SpectralField::operator*=(double a) {
  simd::active().scale(pairs_.data(), pairs_.data(), a, pairs_.size());
  return *this;
}

SpectralField& SpectralField::axpy(double a, const SpectralField& o) {
  require_same_shape(*this, o);
  simd::active().axpy(pairs_.data(), pairs_.data(), a, o.pairs_.data(), pairs_.size());
  return *this;
}

bool SpectralField::all_finite() const noexcept {
  return std::all_of(pairs_.begin(), pairs_.end(), [](double x) { return std::isfinite(x); });
}

double sobolev_norm(const SpectralField& u, SobolevIndex p) {
  const int n = u.n_modes();
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) w[k - 1] = p.value() == 0.0 ? 1.0 : std::pow(kTwoPi * k, 2.0 * p.value());
  return std::sqrt(simd::active().pair_weighted_sumsq(w.data(), u.pairs().data(), static_cast<std::size_t>(n)));
}

double l2_sq(const SpectralField& u) {
  const double r = sobolev_norm(u, SobolevIndex(0.0));
  return r * r;
}

double inner(const SpectralField& u, const SpectralField& w) {
  require_same_shape(u, w);
  double s = 0.0;
  for (std::size_t i = 0; i < u.pairs().size(); ++i) s += u.pairs()[i] * w.pairs()[i];
  return s;
}

SpectralField derivative(const SpectralField& u, int order) {
  std::complex<double> unit;
  switch (order) {
    case -1: unit = {0.0, -1.0}; break;
    case 1: unit = {0.0, 1.0}; break;
    case 2: unit = {-1.0, 0.0}; break;
    case 3: unit = {0.0, -1.0}; break;
    default: throw std::invalid_argument("derivative order must be one of -1, 1, 2, 3");
  }
  SpectralField out(u.n_modes(), u.grid_size());
  const auto in = u.modes();
  auto z = out.modes();
  for (std::size_t k = 0; k < in.size(); ++k) {
    const double factor = std::pow(kTwoPi * static_cast<double>(k + 1), order);
    z[k] = unit * factor * in[k];
  }
  return out;
}

SpectralField nonlinear_term(const SpectralField& u) {
  const int n = u.n_modes();
  auto& fft = RealFft::cached(u.grid_size());
  load_spectrum(fft, u.modes());
  fft.inverse();
  auto r = fft.real();
  simd::active().square(r.data(), r.data(), r.size());
  fft.forward();
  SpectralField out(n, u.grid_size());
  auto z = out.modes();
  store_modes(fft, z);
  for (int k = 1; k <= n; ++k) z[k - 1] *= std::complex<double>(0.0, 3.0 * kTwoPi * k);
  return out;
}

double hamiltonian(const SpectralField& u) {
  const double gradient = sobolev_norm(u, SobolevIndex(1.0));
  const auto g = u.to_grid();
  double cubic = 0.0;
  for (double x : g) cubic += x * x * x;
  return 0.5 * gradient * gradient + cubic / static_cast<double>(g.size());
}

}  // namespace kdvlab
