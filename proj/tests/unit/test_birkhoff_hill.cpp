#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kdvlab/birkhoff.hpp"
#include "kdvlab/error.hpp"
#include "kdvlab/hill.hpp"

using namespace kdvlab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("linear birkhoff map and inverse") {
  SpectralField u(4);
  u.set_coeff(1, 0.3);
  u.set_coeff(-2, -0.2);
  const BirkhoffState v = linear_birkhoff(u);
  CHECK(v.pair(1)[0] == doctest::Approx(0.3 / std::sqrt(2 * kPi)));
  CHECK(v.pair(2)[1] == doctest::Approx(-0.2 / std::sqrt(4 * kPi)));
  const SpectralField w = linear_birkhoff_inverse(v);
  CHECK(w.coeff(1) == doctest::Approx(0.3));
  CHECK(w.coeff(-2) == doctest::Approx(-0.2));
  CHECK(linear_actions(u)(1) == doctest::Approx(0.09 / (4 * kPi)));
}

TEST_CASE("actions and angles reassemble the state") {
  BirkhoffState v(3);
  v.set_pair(1, 0.5, -0.5);
  v.set_pair(3, -1e-3, 2e-3);
  const BirkhoffState w = assemble(actions(v), angles(v));
  for (int j : {1, 3}) {
    CHECK(w.pair(j)[0] == doctest::Approx(v.pair(j)[0]).epsilon(1e-14));
    CHECK(w.pair(j)[1] == doctest::Approx(v.pair(j)[1]).epsilon(1e-14));
  }
  const AngleVector a = angles(v);
  CHECK(a.near_zero[1]);
  CHECK(a.angles[0] == doctest::Approx(1.75 * kPi));
}

TEST_CASE("weighted norms") {
  BirkhoffState v(2, SobolevIndex(1.0));
  v.set_pair(2, 1.0, 0.0);
  CHECK(v.norm_sq() == doctest::Approx(std::pow(4 * kPi, 3)));
  const ActionVector I({0.0, 0.5}, SobolevIndex(1.0));
  CHECK(I.norm() == doctest::Approx(std::pow(4 * kPi, 3)));
  CHECK_THROWS_AS(ActionVector(std::vector<double>{-1.0}, SobolevIndex(0.0)), std::invalid_argument);
  CHECK(action_distance(std::vector<double>{1, 2}, std::vector<double>{1, 1}, SobolevIndex(0.0)) ==
        doctest::Approx(2 * 4 * kPi));
}

TEST_CASE("free discriminant is 2 cos sqrt(lambda)") {
  const SpectralField zero(4);
  for (double lam : {0.5, 7.0, 40.0, 150.0}) {
    CHECK(hill_discriminant(zero, lam) == doctest::Approx(2 * std::cos(std::sqrt(lam))).epsilon(1e-8));
  }
}

TEST_CASE("discriminant against an independent high-precision integration") {
  // Reference values from an arbitrary-precision Taylor ODE solver.
  SpectralField u(4);
  u.set_coeff(1, 0.5);
  CHECK(hill_discriminant(u, 30.0) == doctest::Approx(1.3844292974335594).epsilon(1e-8));
  u.set_coeff(1, 0.3);
  u.set_coeff(-2, 0.2);
  CHECK(hill_discriminant(u, 50.0) == doctest::Approx(1.4108472972659423).epsilon(1e-8));
}

TEST_CASE("first gap and action of a cosine potential") {
  // Edges and (2/pi) int acosh(|Delta|/2) from the same high-precision solver.
  SpectralField u(4);
  u.set_coeff(1, 0.5);
  const HillDiscriminant d(u);
  const Gap g = d.gap(1);
  REQUIRE(g.open);
  CHECK(g.lo == doctest::Approx(9.51447494525805).epsilon(1e-9));
  CHECK(g.hi == doctest::Approx(10.2215675487732).epsilon(1e-9));
  CHECK(d.action(g) == doctest::Approx(0.0198927726319279).epsilon(1e-6));
}

TEST_CASE("small potentials: hill actions approach the linear ones") {
  SpectralField u(4);
  u.set_coeff(1, 1e-3);
  const ActionVector I = hill_actions(u, 2);
  CHECK(I(1) == doctest::Approx(1e-6 / (4 * kPi)).epsilon(1e-4));
  CHECK(I(2) <= 1e-12);
  const auto gaps = hill_gaps(SpectralField(4), 3);
  for (const auto& [lo, hi] : gaps) CHECK(lo == hi);
}

TEST_CASE("under-resolved discriminant refuses") {
  HillOptions o;
  o.steps = 64;
  CHECK_THROWS_AS(hill_discriminant(SpectralField(4), 1e4, o), StepFailure);
}
