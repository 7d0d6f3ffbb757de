#include "rdftune/kernels.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdftune::kernels {

namespace {
std::atomic<int> g_threads{-1};  // -1 = OpenMP default, 0 = serial
}

int threads() {
  int t = g_threads.load(std::memory_order_relaxed);
#ifdef _OPENMP
  if (t < 0) return omp_get_max_threads();
  return t;
#else
  (void)t;
  return 0;
#endif
}

void set_threads(int n) { g_threads.store(n, std::memory_order_relaxed); }

bool parallel_enabled() {
#ifdef _OPENMP
  return threads() != 0;
#else
  return false;
#endif
}

}  // namespace rdftune::kernels
