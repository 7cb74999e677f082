#pragma once

#include "kdvlab/simd.hpp"

namespace kdvlab::simd::detail {

void cmul_scalar(cplx* out, const cplx* a, const cplx* b, std::size_t n);
void axpy_scalar(double* out, const double* x, double alpha, const double* y, std::size_t n);
void scale_scalar(double* out, const double* x, double alpha, std::size_t n);
void square_scalar(double* out, const double* x, std::size_t n);
void pair_scale_scalar(double* out, const double* w, const double* x, std::size_t pairs);
double pair_weighted_sumsq_scalar(const double* w, const double* x, std::size_t pairs);

#if defined(KDVLAB_HAVE_AVX2)
void cmul_avx2(cplx* out, const cplx* a, const cplx* b, std::size_t n);
void axpy_avx2(double* out, const double* x, double alpha, const double* y, std::size_t n);
void scale_avx2(double* out, const double* x, double alpha, std::size_t n);
void square_avx2(double* out, const double* x, std::size_t n);
void pair_scale_avx2(double* out, const double* w, const double* x, std::size_t pairs);
double pair_weighted_sumsq_avx2(const double* w, const double* x, std::size_t pairs);
#endif

}  // namespace kdvlab::simd::detail
