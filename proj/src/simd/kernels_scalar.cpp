#include "kernels_impl.hpp"

namespace kdvlab::simd::detail {

void cmul_scalar(cplx* out, const cplx* a, const cplx* b, std::size_t n) {
  // Spelled out so that the rounding matches the vector variant exactly
  // (std::complex operator* may take the C99 Annex G slow path).
  auto* o = reinterpret_cast<double*>(out);
  const auto* x = reinterpret_cast<const double*>(a);
  const auto* y = reinterpret_cast<const double*>(b);
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = x[2 * i], ai = x[2 * i + 1];
    const double br = y[2 * i], bi = y[2 * i + 1];
    o[2 * i] = ar * br - ai * bi;
    o[2 * i + 1] = ar * bi + ai * br;
  }
}

void axpy_scalar(double* out, const double* x, double alpha, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + alpha * y[i];
}

void scale_scalar(double* out, const double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void square_scalar(double* out, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * x[i];
}

void pair_scale_scalar(double* out, const double* w, const double* x, std::size_t pairs) {
  for (std::size_t k = 0; k < pairs; ++k) {
    out[2 * k] = w[k] * x[2 * k];
    out[2 * k + 1] = w[k] * x[2 * k + 1];
  }
}

double pair_weighted_sumsq_scalar(const double* w, const double* x, std::size_t pairs) {
  double s = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    s += w[k] * (x[2 * k] * x[2 * k] + x[2 * k + 1] * x[2 * k + 1]);
  }
  return s;
}

}  // namespace kdvlab::simd::detail
