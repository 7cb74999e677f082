#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "kdvlab/averaging.hpp"
#include "kdvlab/error.hpp"
#include "kdvlab/gaussian_measure.hpp"

using namespace kdvlab;

namespace {

constexpr double kPi = std::numbers::pi;

BirkhoffState test_state() {
  BirkhoffState v(4, SobolevIndex(1.0));
  v.set_pair(1, 0.3, -0.1);
  v.set_pair(2, 0.05, 0.2);
  v.set_pair(3, -0.02, 0.01);
  v.set_pair(4, 0.001, 0.0);
  return v;
}

}  // namespace

TEST_CASE("pairwise sum") {
  std::vector<double> x(1000);
  std::iota(x.begin(), x.end(), 1.0);
  CHECK(pairwise_sum(x) == 500500.0);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("korobov generator is coprime and deterministic") {
  for (auto [M, N] : {std::pair{64, 4}, {128, 8}, {1021, 3}}) {
    const int a = korobov_generator(M, N);
    CHECK(std::gcd(a, M) == 1);
    CHECK(korobov_generator(M, N) == a);
  }
}

TEST_CASE("angle-independent functionals are fixed points") {
  const BirkhoffState v = test_state();
  AveragingConfig cfg;
  cfg.N_angles = 4;
  const Estimate e = average_first_N([](const BirkhoffState& w) { return w.norm_sq(); }, v, cfg, 5);
  CHECK(e.value == doctest::Approx(v.norm_sq()).epsilon(1e-13));
  CHECK(e.stderr_ <= 1e-13 * v.norm_sq());
}

TEST_CASE("lattice rule averages low trigonometric harmonics to zero") {
  const BirkhoffState v = test_state();
  AveragingConfig cfg;
  cfg.N_angles = 3;
  // v_1 v_2 . v_3-type products: harmonics of order <= 3, removed by the lattice.
  auto g = [](const BirkhoffState& w) { return w.pair(1)[0] * w.pair(2)[1] + w.pair(3)[0]; };
  const Estimate e = average_first_N(g, v, cfg, 9);
  CHECK(std::abs(e.value) <= 1e-15);
  cfg.scheme = QuadScheme::monte_carlo;
  cfg.M_samples = 4096;
  const Estimate mc = average_first_N(g, v, cfg, 9);
  CHECK(std::abs(mc.value) <= 5 * mc.stderr_);
  CHECK(mc.stderr_ > 0.0);
}

TEST_CASE("linear backend slow field: finite differences match the closed form") {
  SpectralField u(6);
  u.set_coeff(1, 0.05);
  u.set_coeff(-2, 0.02);
  u.set_coeff(3, -0.01);
  SpectralField prof(6);
  prof.set_coeff(1, 1.0);
  prof.set_coeff(-2, 0.5);
  const PerturbationSpec f = PerturbationSpec::fixed(prof);
  AveragingConfig cfg;
  const auto fd = slow_field_F(u, f, cfg);
  const auto exact = slow_field_linear(u, f);
  REQUIRE(fd.size() == exact.size());
  for (std::size_t k = 0; k < fd.size(); ++k) CHECK(fd[k] == doctest::Approx(exact[k]).epsilon(1e-8).scale(1e-12));
  // F_1 = v_1(u) . v_1(f) = 0.05 / (2 pi)
  CHECK(exact[0] == doctest::Approx(0.05 / (2 * kPi)));
}

TEST_CASE("fixed profile with the linear backend has zero averaged field") {
  SpectralField prof(4);
  prof.set_coeff(1, 1.0);
  const ActionVector J({1e-4, 2e-5, 0.0, 0.0}, SobolevIndex(1.0));
  AveragingConfig cfg;
  cfg.N_angles = 4;
  const VectorEstimate F = averaged_field(J, PerturbationSpec::fixed(prof), cfg, 3);
  for (double x : F.value) CHECK(std::abs(x) <= 1e-15);
}

TEST_CASE("averaged trajectory: damping decays actions at twice the rate") {
  // smoothed_damping: F_k = 2 rate_k I_k, so J_k(tau) = J_k(0) exp(2 rate_k tau).
  const PerturbationSpec f = PerturbationSpec::smoothing(SmoothingMap::smoothed_damping, 1.0, 2.0, SpectralField(4));
  const ActionVector J0({1e-4, 5e-5, 0.0, 1e-6}, SobolevIndex(1.0));
  AveragingConfig cfg;
  cfg.N_angles = 4;
  const AveragedTrajectory t = integrate_averaged(J0, 0.5, f, cfg, 1);
  for (int k : {1, 2, 4}) {
    const double want = J0(k) * std::exp(2 * f.diagonal_rate(k) * 0.5);
    CHECK(t.J.back()(k) == doctest::Approx(want).epsilon(1e-6));
    CHECK(t.at(0.25)[k - 1] == doctest::Approx(J0(k) * std::exp(2 * f.diagonal_rate(k) * 0.25)).epsilon(1e-6));
  }
  CHECK(t.clip_events == 0);
  CHECK_THROWS_AS(t.at(0.6), RangeMismatch);
}

TEST_CASE("quasi-periodic average of a trig polynomial") {
  TrigPolynomial g;
  g.terms = {{{0, 0}, 0.25, 0.0}, {{1, 0}, 1.0, 0.0}, {{1, -1}, 0.0, 0.5}};
  const std::vector<double> omega{1.0, std::sqrt(2.0)}, x0{0.3, 0.1};
  auto fn = [&](std::span<const double> x) { return g(x); };
  CHECK(g.mean() == 0.25);
  CHECK(g.order() == 1);
  for (double T : {10.0, 100.0}) {
    // Closed form of (1/T) int_0^T of each harmonic.
    double exact = 0.25;
    exact += (std::sin(x0[0] + T) - std::sin(x0[0])) / T;
    const double w = 1.0 - std::sqrt(2.0), p = x0[0] - x0[1];
    exact += 0.5 * (std::cos(p) - std::cos(p + w * T)) / (w * T);
    CHECK(time_average_quasiperiodic(fn, x0, omega, T) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(std::abs(time_average_quasiperiodic(fn, x0, omega, T) - g.mean()) <= g.error_bound(omega, T));
  }
}

TEST_CASE("resonant frequencies are rejected") {
  TrigPolynomial g;
  g.terms = {{{1, -1}, 1.0, 0.0}};
  const std::vector<double> omega{1.0, 1.0}, x0{0.0, 0.0};
  CHECK_THROWS_AS(time_average_quasiperiodic([&](std::span<const double> x) { return g(x); }, x0, omega, 10.0),
                  ResonanceDetected);
}

TEST_CASE("weyl frequencies and sums") {
  const auto L = weyl_frequencies(3, 2);
  CHECK(L.size() == 62);  // (5^3 - 1) / 2
  for (const auto& l : L) {
    const auto first = std::find_if(l.begin(), l.end(), [](int x) { return x != 0; });
    REQUIRE(first != l.end());
    CHECK(*first > 0);
  }
  std::vector<AngleVector> constant(10, AngleVector::from({0.4, 1.0, 2.0}));
  const std::vector<int> l{1, -2, 1};
  CHECK(weyl_sum(constant, l) == doctest::Approx(1.0));

  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  const int M = 4000;
  std::vector<AngleVector> iid;
  for (int i = 0; i < M; ++i) iid.push_back(AngleVector::from({u(g), u(g), u(g)}));
  for (const auto& f : L) CHECK(weyl_sum(iid, f) <= 3.0 / std::sqrt(M));
}
