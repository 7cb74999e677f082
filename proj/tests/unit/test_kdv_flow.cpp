#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kdvlab/error.hpp"
#include "kdvlab/kdv_flow.hpp"

using namespace kdvlab;

TEST_CASE("zero data without forcing stays zero") {
  FlowParams fp;
  fp.t_end = 0.01;
  const Trajectory t = integrate(SpectralField(8), fp, PerturbationSpec::none(8));
  CHECK(t.size() == 101);
  for (double x : t.states.back().pairs()) CHECK(x == 0.0);
}

TEST_CASE("small data rotates at the Airy frequency") {
  SpectralField u0(8);
  u0.set_coeff(3, 1e-7);
  FlowParams fp;
  fp.t_end = 1e-3;
  fp.dt = 1e-5;
  fp.record_every = 100;
  const Trajectory t = integrate(u0, fp, PerturbationSpec::none(8));
  const double w = std::pow(2 * std::numbers::pi * 3, 3) * 1e-3;
  const SpectralField& u = t.states.back();
  CHECK(std::hypot(u.coeff(3), u.coeff(-3)) == doctest::Approx(1e-7).epsilon(1e-9));
  CHECK(std::abs(std::remainder(std::atan2(u.coeff(-3), u.coeff(3)), 2 * std::numbers::pi) -
                 std::remainder(w, 2 * std::numbers::pi)) <= 1e-7);
}

TEST_CASE("constant forcing from rest follows the linear response") {
  // z' = i w z + eps, z(0) = 0 gives |z(t)| = eps |2 sin(w t / 2) / w|.
  const double eps = 1e-3, T = 0.05;
  FlowParams fp;
  fp.eps = eps;
  fp.t_end = T;
  fp.record_every = 100;
  const Trajectory t = integrate(SpectralField(8), fp, PerturbationSpec::fixed(SpectralField::basis(1, 8)));
  const double w = std::pow(2 * std::numbers::pi, 3);
  const SpectralField& u = t.states.back();
  CHECK(std::hypot(u.coeff(1), u.coeff(-1)) ==
        doctest::Approx(eps * std::abs(2 * std::sin(w * T / 2) / w)).epsilon(1e-8));
}

TEST_CASE("galerkin truncation and cutoff") {
  SpectralField u(8);
  for (int s = 1; s <= 8; ++s) u.set_coeff(s, 1.0);
  const SpectralField v = galerkin_truncate(u, 3);
  CHECK(v.coeff(3) == 1.0);
  CHECK(v.coeff(4) == 0.0);
}

TEST_CASE("galerkin convergence probe decreases with the cutoff") {
  SpectralField u0(16);
  u0.set_coeff(1, 0.2);
  u0.set_coeff(-2, 0.1);
  FlowParams fp;
  fp.t_end = 0.02;
  fp.record_every = 50;
  const auto err = galerkin_convergence_probe(u0, fp, PerturbationSpec::none(16), {2, 4, 8, 16});
  REQUIRE(err.size() == 4);
  CHECK(err[0] > err[1]);
  CHECK(err[1] > err[2]);
  CHECK(err[3] == 0.0);
}

TEST_CASE("parameter validation and horizon") {
  FlowParams fp;
  fp.dt = 0.0;
  CHECK_THROWS_AS(fp.validate(), std::invalid_argument);
  fp = FlowParams{};
  fp.eps = 0.5;
  fp.t_end = 100.0;
  CHECK_THROWS_AS(integrate(SpectralField(4), fp, PerturbationSpec::none(4)), HorizonExceeded);
}

TEST_CASE("non-finite states raise blowup") {
  SpectralField u0(4);
  u0.set_coeff(1, 1e6);
  FlowParams fp;
  fp.t_end = 0.1;
  CHECK_THROWS_AS(integrate(u0, fp, PerturbationSpec::none(4)), NumericalError);
}

TEST_CASE("frequency estimate for small data is the Airy frequency") {
  SpectralField u0(4);
  u0.set_coeff(1, 1e-6);
  u0.set_coeff(2, 1e-6);
  const FrequencyVector w = estimate_frequencies(u0, 0.01, 2);
  REQUIRE(w.n_modes() == 2);
  CHECK(w.freqs[0] == doctest::Approx(std::pow(2 * std::numbers::pi, 3)).epsilon(1e-6));
  CHECK(w.freqs[1] == doctest::Approx(std::pow(4 * std::numbers::pi, 3)).epsilon(1e-6));
}
