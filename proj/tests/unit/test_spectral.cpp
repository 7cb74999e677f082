#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kdvlab/spectral.hpp"

using namespace kdvlab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("dealiased grid is the smallest power of two above 3n") {
  CHECK(dealiased_grid_size(1) == 4);
  CHECK(dealiased_grid_size(8) == 32);
  CHECK(dealiased_grid_size(32) == 128);
  CHECK(dealiased_grid_size(33) == 128);
  CHECK(dealiased_grid_size(43) == 256);
}

TEST_CASE("basis functions on the grid") {
  const auto c = SpectralField::basis(2, 4, 16).to_grid();
  const auto s = SpectralField::basis(-3, 4, 16).to_grid();
  for (int j = 0; j < 16; ++j) {
    const double x = j / 16.0;
    CHECK(c[j] == doctest::Approx(std::sqrt(2.0) * std::cos(4 * kPi * x)).epsilon(1e-14));
    CHECK(s[j] == doctest::Approx(std::sqrt(2.0) * std::sin(-6 * kPi * x)).epsilon(1e-14));
  }
}

TEST_CASE("grid round trip") {
  SpectralField u(8, 32);
  for (int s = 1; s <= 8; ++s) {
    u.set_coeff(s, 1.0 / s);
    u.set_coeff(-s, -0.5 / (s * s));
  }
  const SpectralField w = SpectralField::from_grid(u.to_grid(), 8, 32);
  for (int s = -8; s <= 8; ++s) {
    if (s) CHECK(w.coeff(s) == doctest::Approx(u.coeff(s)).epsilon(1e-14));
  }
}

TEST_CASE("norms and functionals of a single mode") {
  const double a = 0.3;
  const SpectralField u = a * SpectralField::basis(1, 8);
  CHECK(l2_sq(u) == doctest::Approx(a * a));
  CHECK(sobolev_norm(u, SobolevIndex(1.0)) == doctest::Approx(2 * kPi * a));
  // int (u_x^2/2 + u^3) = (2 pi a)^2 / 2; the cube of a cosine averages to zero.
  CHECK(hamiltonian(u) == doctest::Approx(2 * kPi * kPi * a * a).epsilon(1e-13));
  // e_1 e_-1 = e_-2 / sqrt2 has zero mean, so the cubic term vanishes
  const SpectralField w = SpectralField::basis(1, 8) + SpectralField::basis(-1, 8);
  CHECK(hamiltonian(w) == doctest::Approx(4 * kPi * kPi).epsilon(1e-13));
}

TEST_CASE("derivatives rotate and scale pairs") {
  const SpectralField e1 = SpectralField::basis(1, 4);
  // e_-1 = sqrt2 sin(-2 pi x), so e_1' = 2 pi e_-1.
  const SpectralField d = derivative(e1, 1);
  CHECK(d.coeff(-1) == doctest::Approx(2 * kPi));
  CHECK(d.coeff(1) == doctest::Approx(0.0));
  const SpectralField d3 = derivative(e1, 3);
  CHECK(d3.coeff(-1) == doctest::Approx(-std::pow(2 * kPi, 3)));
  const SpectralField back = derivative(d, -1);
  CHECK(back.coeff(1) == doctest::Approx(1.0));
}

TEST_CASE("nonlinear term of e_1") {
  // 6 u u_x = 3 (u^2)_x with u^2 = 1 + e_2 / sqrt2, so only e_-2 survives.
  const SpectralField n = nonlinear_term(SpectralField::basis(1, 8));
  CHECK(n.coeff(-2) == doctest::Approx(6 * std::sqrt(2.0) * kPi).epsilon(1e-13));
  CHECK(n.coeff(2) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(n.coeff(1) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("nonlinear term is grid independent above the dealiasing threshold") {
  SpectralField u(16);
  for (int s = 1; s <= 16; ++s) {
    u.set_coeff(s, std::sin(1.0 + s) / s);
    u.set_coeff(-s, std::cos(2.0 * s) / s);
  }
  const SpectralField a = nonlinear_term(u);
  const SpectralField b = nonlinear_term(u.with_grid(2 * u.grid_size()));
  double worst = 0.0;
  for (int s = -16; s <= 16; ++s) {
    if (s) worst = std::max(worst, std::abs(a.coeff(s) - b.coeff(s)));
  }
  CHECK(worst <= 1e-12);
  // Conservation structure: <u, 6 u u_x> = 0.
  CHECK(std::abs(inner(u, a)) <= 1e-11);
}
