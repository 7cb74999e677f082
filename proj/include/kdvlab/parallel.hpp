#pragma once

// Index-keyed task pool. Results are written by index, so any reduction
// done afterwards in index order is independent of the schedule.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kdvlab {

/// Worker count: KDVLAB_THREADS if set, otherwise hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("KDVLAB_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool in_pool = false;

struct PoolScope {
  bool prev;
  PoolScope() : prev(in_pool) { in_pool = true; }
  ~PoolScope() { in_pool = prev; }
};
}  // namespace detail

/// Calls fn(i) for i in [0, count). Nested calls from inside a worker run
/// inline. The first exception (lowest index) is rethrown after all workers
/// finish.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
  if (workers <= 1 || detail::in_pool) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t err_index = count;
  std::exception_ptr err;
  auto body = [&] {
    detail::PoolScope scope;
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace kdvlab
