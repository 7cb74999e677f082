#include <doctest.h>

#include <random>
#include <vector>

#include "kdvlab/simd.hpp"

using namespace kdvlab::simd;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (double& v : x) v = d(g);
  return x;
}

}  // namespace

TEST_CASE("avx2 kernels match the scalar reference") {
  const Kernels* v = avx2_kernels();
  if (!v) {
    MESSAGE("AVX2 unavailable; equivalence not exercised");
    return;
  }
  const Kernels& s = scalar_kernels();
  // Odd lengths exercise the scalar tails.
  for (std::size_t n : {0u, 1u, 3u, 7u, 64u, 129u}) {
    const auto a = noise(2 * n, 1), b = noise(2 * n, 2), w = noise(n, 3);
    std::vector<double> o1(2 * n), o2(2 * n);

    s.cmul(reinterpret_cast<cplx*>(o1.data()), reinterpret_cast<const cplx*>(a.data()),
           reinterpret_cast<const cplx*>(b.data()), n);
    v->cmul(reinterpret_cast<cplx*>(o2.data()), reinterpret_cast<const cplx*>(a.data()),
            reinterpret_cast<const cplx*>(b.data()), n);
    CHECK(o1 == o2);

    s.axpy(o1.data(), a.data(), 0.37, b.data(), 2 * n);
    v->axpy(o2.data(), a.data(), 0.37, b.data(), 2 * n);
    CHECK(o1 == o2);

    s.scale(o1.data(), a.data(), -1.5, 2 * n);
    v->scale(o2.data(), a.data(), -1.5, 2 * n);
    CHECK(o1 == o2);

    s.square(o1.data(), a.data(), 2 * n);
    v->square(o2.data(), a.data(), 2 * n);
    CHECK(o1 == o2);

    s.pair_scale(o1.data(), w.data(), a.data(), n);
    v->pair_scale(o2.data(), w.data(), a.data(), n);
    CHECK(o1 == o2);

    const double r1 = s.pair_weighted_sumsq(w.data(), a.data(), n);
    const double r2 = v->pair_weighted_sumsq(w.data(), a.data(), n);
    CHECK(r2 == doctest::Approx(r1).epsilon(1e-13));
  }
}

TEST_CASE("in-place cmul and axpy") {
  for (const Kernels* k : {&scalar_kernels(), avx2_kernels()}) {
    if (!k) continue;
    std::vector<cplx> a{{1, 2}, {3, -1}, {0.5, 0.5}};
    const std::vector<cplx> b{{0, 1}, {2, 0}, {1, -1}};
    k->cmul(a.data(), a.data(), b.data(), a.size());
    CHECK(a[0] == cplx(-2, 1));
    CHECK(a[1] == cplx(6, -2));
    CHECK(a[2] == cplx(1, 0));
    std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{1, 1, 1, 1, 1};
    k->axpy(x.data(), x.data(), 2.0, y.data(), x.size());
    CHECK(x == std::vector<double>{3, 4, 5, 6, 7});
  }
}

TEST_CASE("pair_weighted_sumsq closed form") {
  const std::vector<double> w{1, 2, 3};
  const std::vector<double> x{1, 0, 0, 1, 1, 1};
  CHECK(scalar_kernels().pair_weighted_sumsq(w.data(), x.data(), 3) == 9.0);
}
