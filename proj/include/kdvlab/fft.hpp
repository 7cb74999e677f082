#pragma once

#include <complex>
#include <span>

#include <fftw3.h>

namespace kdvlab {

/// Real FFT of fixed length N with its own aligned buffers.
///
/// Plans use FFTW_ESTIMATE so the algorithm (and therefore the rounding)
/// does not depend on timing. Plan creation is serialized internally;
/// execution on distinct instances is thread-safe.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const noexcept { return n_; }
  std::span<double> real() noexcept { return {real_, static_cast<std::size_t>(n_)}; }
  std::span<std::complex<double>> spectrum() noexcept {
    return {reinterpret_cast<std::complex<double>*>(spec_), static_cast<std::size_t>(n_ / 2 + 1)};
  }

  /// spectrum <- unnormalized DFT of real.
  void forward();
  /// real <- unnormalized inverse DFT of spectrum (spectrum is clobbered).
  void inverse();

  /// Per-thread cached instance for length n.
  static RealFft& cached(int n);

 private:
  int n_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace kdvlab
