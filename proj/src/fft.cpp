#include "kdvlab/fft.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace kdvlab {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n < 4 || (n & (n - 1)) != 0) throw std::invalid_argument("RealFft: size must be a power of two >= 4");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(static_cast<std::size_t>(n));
  spec_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(inv_);
  fftw_destroy_plan(fwd_);
  fftw_free(spec_);
  fftw_free(real_);
}

void RealFft::forward() { fftw_execute(fwd_); }
void RealFft::inverse() { fftw_execute(inv_); }

RealFft& RealFft::cached(int n) {
  thread_local std::map<int, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace kdvlab
