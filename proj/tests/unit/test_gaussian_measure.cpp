#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kdvlab/gaussian_measure.hpp"

using namespace kdvlab;

namespace {

constexpr double kPi = std::numbers::pi;

PerturbationSpec e1_forcing(int n) { return PerturbationSpec::fixed(SpectralField::basis(1, n)); }

}  // namespace

TEST_CASE("power-law variances and expectations") {
  const MeasureSpec m = MeasureSpec::power_law(4, SobolevIndex(1.0), 2.0, 2.0, 3.0);
  CHECK(m.sigma()[1] == doctest::Approx(0.75));
  CHECK(m.variance(2) == doctest::Approx(0.75 * std::pow(4 * kPi, -3)));
  CHECK(m.expected_norm_sq() == doctest::Approx(2 * 3 * (1 + 0.25 + 1.0 / 9 + 1.0 / 16)));
  const MeasureSpec t = MeasureSpec::power_law_with_l2(32, SobolevIndex(3.0), 2.0, 2.0, 0.05);
  CHECK(t.expected_l2_sq() == doctest::Approx(0.0025));
  CHECK(t.truncated(8).n_modes() == 8);
  CHECK(t.truncated(8).variance(8) == t.variance(8));
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(MeasureSpec::power_law(4, SobolevIndex(1.0), 2.0, 0.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(MeasureSpec::from_sigma({1.0, -1.0}, SobolevIndex(1.0), 2.0).validate(), std::invalid_argument);
  // j^{-zeta0} / sigma_j grows like j^{exponent - zeta0}.
  const MeasureSpec steep = MeasureSpec::power_law(64, SobolevIndex(1.0), 2.0, 6.0);
  CHECK(steep.admissibility_ratio() == doctest::Approx(std::pow(64.0, 4)));
  CHECK_THROWS_AS(steep.validate(1e6), std::invalid_argument);
}

TEST_CASE("sampling is keyed by member, not by call order") {
  const MeasureSpec m = MeasureSpec::power_law(6, SobolevIndex(1.0), 2.0, 2.0);
  const BirkhoffState a = sample(m, 42, 3);
  sample(m, 42, 0);
  const BirkhoffState b = sample(m, 42, 3);
  CHECK(std::equal(a.pairs().begin(), a.pairs().end(), b.pairs().begin()));
  const BirkhoffState c = sample(m, 42, 4);
  CHECK(a.pairs()[0] != c.pairs()[0]);
  // Truncation keeps the low modes of the same member.
  const BirkhoffState d = sample(m.truncated(3), 42, 3);
  CHECK(d.pair(2)[1] == a.pair(2)[1]);
}

TEST_CASE("log density and rotation invariance") {
  const MeasureSpec m = MeasureSpec::power_law(3, SobolevIndex(1.0), 2.0, 2.0);
  double want = 0.0;
  for (int j = 1; j <= 3; ++j) want -= std::log(2 * kPi * m.variance(j));
  CHECK(log_density(m, BirkhoffState(3, SobolevIndex(1.0))) == doctest::Approx(want));
  const BirkhoffState v = sample(m, 1, 0);
  const BirkhoffState r = rotate(v, AngleVector::from({0.3, 2.0, -1.0}));
  CHECK(log_density(m, r) == doctest::Approx(log_density(m, v)).epsilon(1e-13));
  CHECK(rotation_cn(v, m, 0.01) <= 1e-12);
}

TEST_CASE("Liouville rate for a constant field") {
  // X = v(f) is constant, so div X = 0 and c^n = -v_1 X_1 / var_1.
  const MeasureSpec m = MeasureSpec::power_law(4, SobolevIndex(3.0), 2.0, 2.0);
  const BirkhoffState v = sample(m, 7, 0);
  const PerturbationSpec f = e1_forcing(4);
  const BirkhoffState X = pushforward_field(v, f);
  CHECK(X.pair(1)[0] == doctest::Approx(1.0 / std::sqrt(2 * kPi)));
  CHECK(field_divergence(v, f, 1e-6) == doctest::Approx(0.0).scale(1.0));
  CHECK(cn_divergence(v, f, m) == doctest::Approx(-v.pair(1)[0] / (std::sqrt(2 * kPi) * m.variance(1))));
}

TEST_CASE("diagonal damping has constant divergence") {
  const MeasureSpec m = MeasureSpec::power_law(3, SobolevIndex(1.0), 2.0, 2.0);
  const PerturbationSpec f = PerturbationSpec::smoothing(SmoothingMap::smoothed_damping, 0.5, 2.0, SpectralField(3));
  double want = 0.0;
  for (int j = 1; j <= 3; ++j) want += 2 * f.diagonal_rate(j);
  CHECK(field_divergence(sample(m, 3, 0), f, 1e-6) == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("qi flow: reversibility and the unforced control") {
  const MeasureSpec m = MeasureSpec::power_law(2, SobolevIndex(3.0), 2.0, 2.0);
  const BirkhoffState v = sample(m, 5, 0);
  QiOptions o;
  o.record_points = 10;
  const PerturbationSpec f = e1_forcing(2);
  const BirkhoffState fwd = qi_flow(v, f, m, 0.1, 0.05, o);
  const BirkhoffState back = qi_flow(fwd, f, m, 0.1, -0.05, o);
  for (std::size_t i = 0; i < v.pairs().size(); ++i) CHECK(back.pairs()[i] == doctest::Approx(v.pairs()[i]).epsilon(1e-9));

  std::vector<DensityRecord> rec;
  qi_flow(v, PerturbationSpec::none(2), m, 0.1, 0.05, o, &rec);
  REQUIRE(rec.size() == 11);
  for (const auto& r : rec) CHECK(r.A == 0.0);
}

TEST_CASE("quasi-invariance probe on a small ensemble") {
  const MeasureSpec m = MeasureSpec::power_law_with_l2(2, SobolevIndex(3.0), 2.0, 2.0, 0.05);
  QiOptions o;
  o.ball_samples = 128;
  o.record_points = 10;
  const QiReport r = quasi_invariance_probe(m, e1_forcing(2), 0.1, 0.05, 8, 11, o);
  CHECK(r.members.size() == 8);
  CHECK(r.identity_ok);
  CHECK(r.c_hat_tau > 0.0);
  CHECK(r.ball.bound_lo == doctest::Approx(std::exp(-r.c_hat_tau)));
  CHECK(r.ball.hits_initial > 0);
}
