#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hypdamp::par {

// Worker cap: explicit argument > HYPDAMP_JOBS env > OpenMP default.
inline int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HYPDAMP_JOBS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Serial reference path.  Kept separate (not jobs==1 through the OpenMP
// runtime) so tests can compare the two implementations directly.
template <class F>
void for_each_index_serial(std::size_t n, F&& f) {
  for (std::size_t i = 0; i < n; ++i) f(i);
}

// Parallel map over [0, n).  f(i) must only touch slot i of caller-owned
// storage; results are then deterministic regardless of thread count.
template <class F>
void for_each_index(std::size_t n, F&& f, int jobs = 0) {
#ifdef _OPENMP
  int nthreads = resolve_jobs(jobs);
  if (nthreads > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      f(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)jobs;
#endif
  for_each_index_serial(n, f);
}

inline bool parallel_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace hypdamp::par
