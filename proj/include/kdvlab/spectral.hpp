#pragma once

// Zero-mean real periodic functions on T = R/Z in the real Fourier basis
//
//   e_s = sqrt(2) cos(2 pi s x)   s > 0,
//   e_s = sqrt(2) sin(2 pi s x)   s < 0,
//
// truncated to |s| <= n_modes. Coefficients are stored as interleaved
// pairs (u_1, u_-1, u_2, u_-2, ...). The pair (u_k, u_-k) read as the
// complex number u_k + i u_-k rotates counter-clockwise under the linear
// flow u_t = -u_xxx, which is how the integrator and the kernels treat it.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kdvlab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Order p >= 0 of the homogeneous Sobolev space H^p.
class SobolevIndex {
 public:
  explicit SobolevIndex(double p);
  double value() const noexcept { return p_; }

 private:
  double p_;
};

/// Smallest power of two N with N > 3 n, the alias-free grid for quadratic
/// products truncated back to n modes (and exact trapezoid quadrature of cubes).
int dealiased_grid_size(int n_modes);

class SpectralField {
 public:
  SpectralField() = default;
  /// Zero field. grid_size defaults to dealiased_grid_size(n_modes).
  explicit SpectralField(int n_modes, int grid_size = 0);

  static SpectralField from_pairs(std::vector<double> pairs, int grid_size = 0);
  /// The basis element e_s (|s| <= n_modes).
  static SpectralField basis(int s, int n_modes, int grid_size = 0);
  /// L2 projection of collocation values at x_j = j / N onto modes 1..n_modes.
  static SpectralField from_grid(std::span<const double> values, int n_modes, int grid_size = 0);

  int n_modes() const noexcept { return n_modes_; }
  int grid_size() const noexcept { return grid_size_; }

  /// Coefficient of e_s, s in {+-1, ..., +-n_modes}.
  double coeff(int s) const;
  void set_coeff(int s, double value);

  std::span<const double> pairs() const noexcept { return pairs_; }
  std::span<double> pairs() noexcept { return pairs_; }
  std::span<const std::complex<double>> modes() const noexcept;
  std::span<std::complex<double>> modes() noexcept;

  /// Values at the N collocation points x_j = j / N.
  std::vector<double> to_grid() const;
  /// Values on a finer grid of `points` (power of two >= 2 n_modes + 2).
  std::vector<double> to_grid(int points) const;

  /// Same coefficients on a different number of modes (truncate or zero-pad).
  SpectralField resized(int n_modes, int grid_size = 0) const;
  SpectralField with_grid(int grid_size) const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double a);
  /// this += a * o
  SpectralField& axpy(double a, const SpectralField& o);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  bool all_finite() const noexcept;

 private:
  int n_modes_ = 0;
  int grid_size_ = 0;
  std::vector<double> pairs_;
};

/// (sum_s (2 pi |s|)^{2p} u_s^2)^{1/2}.
double sobolev_norm(const SpectralField& u, SobolevIndex p);
/// ||u||_0^2.
double l2_sq(const SpectralField& u);
/// Exact spectral (anti)derivative; order in {-1, 1, 2, 3}.
SpectralField derivative(const SpectralField& u, int order);
/// 6 u u_x = 3 d/dx (u^2), dealiased and projected onto the field's modes.
SpectralField nonlinear_term(const SpectralField& u);
/// H(u) = int (u_x^2 / 2 + u^3) dx.
double hamiltonian(const SpectralField& u);
/// L2 inner product <u, w>.
double inner(const SpectralField& u, const SpectralField& w);

}  // namespace kdvlab
