#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mfg {

// Loops shorter than this run serially; the work per index is tiny.
constexpr std::size_t kParallelThreshold = 512;

void set_threads(int n);
int max_threads();

/// Runs f(k) for k in [0, n). Each index writes only its own outputs, so the
/// result does not depend on the thread count. The first exception thrown by
/// any index is rethrown after the loop.
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t threshold = kParallelThreshold) {
  std::exception_ptr error;
  std::mutex mu;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) if (n >= threshold)
  for (long long k = 0; k < count; ++k) {
    try {
      f(static_cast<std::size_t>(k));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace mfg
