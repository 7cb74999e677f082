#pragma once

// Data-parallel inner loops of the spectral core.
//
// Every kernel has a scalar reference implementation and, where the CPU
// supports it, an AVX2 variant. The active table is chosen once at first
// use: AVX2 when __builtin_cpu_supports("avx2") reports it, unless the
// environment variable KDVLAB_SIMD=scalar forces the reference path.
//
// Element-wise kernels are bit-identical across variants (no FMA
// contraction in either). Reductions differ only in summation order.

#include <complex>
#include <cstddef>
#include <string_view>

namespace kdvlab::simd {

using cplx = std::complex<double>;

struct Kernels {
  std::string_view name;

  /// out[i] = a[i] * b[i]; out may alias a or b.
  void (*cmul)(cplx* out, const cplx* a, const cplx* b, std::size_t n);
  /// out[i] = x[i] + alpha * y[i]; out may alias x or y.
  void (*axpy)(double* out, const double* x, double alpha, const double* y, std::size_t n);
  /// out[i] = alpha * x[i].
  void (*scale)(double* out, const double* x, double alpha, std::size_t n);
  /// out[i] = x[i] * x[i].
  void (*square)(double* out, const double* x, std::size_t n);
  /// out[2k+c] = w[k] * x[2k+c] for c in {0,1}; pairs are (u_k, u_{-k}).
  void (*pair_scale)(double* out, const double* w, const double* x, std::size_t pairs);
  /// sum_k w[k] * (x[2k]^2 + x[2k+1]^2).
  double (*pair_weighted_sumsq)(const double* w, const double* x, std::size_t pairs);
};

const Kernels& scalar_kernels() noexcept;

/// nullptr when the binary or the CPU lacks AVX2.
const Kernels* avx2_kernels() noexcept;

/// The table used by the library.
const Kernels& active() noexcept;

/// Override the runtime selection (tests, benchmarks). Not thread-safe
/// against concurrent kernel use.
void set_active(const Kernels& k) noexcept;

}  // namespace kdvlab::simd
