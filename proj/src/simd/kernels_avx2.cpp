// Compiled with -mavx2 only; never called unless the CPU reports AVX2.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace kdvlab::simd::detail {

void cmul_avx2(cplx* out, const cplx* a, const cplx* b, std::size_t n) {
  auto* o = reinterpret_cast<double*>(out);
  const auto* x = reinterpret_cast<const double*>(a);
  const auto* y = reinterpret_cast<const double*>(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(x + 2 * i);   // ar0 ai0 ar1 ai1
    const __m256d vb = _mm256_loadu_pd(y + 2 * i);   // br0 bi0 br1 bi1
    const __m256d ar = _mm256_movedup_pd(va);         // ar0 ar0 ar1 ar1
    const __m256d ai = _mm256_permute_pd(va, 0xF);    // ai0 ai0 ai1 ai1
    const __m256d bs = _mm256_permute_pd(vb, 0x5);    // bi0 br0 bi1 br1
    // (ar*br - ai*bi, ar*bi + ai*br)
    const __m256d p = _mm256_mul_pd(ar, vb);
    const __m256d q = _mm256_mul_pd(ai, bs);
    _mm256_storeu_pd(o + 2 * i, _mm256_addsub_pd(p, q));
  }
  if (i < n) cmul_scalar(out + i, a + i, b + i, n - i);
}

void axpy_avx2(double* out, const double* x, double alpha, const double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), t));
  }
  for (; i < n; ++i) out[i] = x[i] + alpha * y[i];
}

void scale_avx2(double* out, const double* x, double alpha, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void square_avx2(double* out, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(v, v));
  }
  for (; i < n; ++i) out[i] = x[i] * x[i];
}

namespace {
// w0 w0 w1 w1 from two consecutive weights.
inline __m256d dup_pairs(const double* w) {
  const __m128d lo = _mm_loadu_pd(w);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(lo), 0x50);
}
}  // namespace

void pair_scale_avx2(double* out, const double* w, const double* x, std::size_t pairs) {
  std::size_t k = 0;
  for (; k + 2 <= pairs; k += 2) {
    _mm256_storeu_pd(out + 2 * k, _mm256_mul_pd(dup_pairs(w + k), _mm256_loadu_pd(x + 2 * k)));
  }
  if (k < pairs) pair_scale_scalar(out + 2 * k, w + k, x + 2 * k, pairs - k);
}

double pair_weighted_sumsq_avx2(const double* w, const double* x, std::size_t pairs) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= pairs; k += 2) {
    const __m256d v = _mm256_loadu_pd(x + 2 * k);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dup_pairs(w + k), _mm256_mul_pd(v, v)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  if (k < pairs) s += pair_weighted_sumsq_scalar(w + k, x + 2 * k, pairs - k);
  return s;
}

}  // namespace kdvlab::simd::detail
