#pragma once

#include <cstddef>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hazfit {

// Replicate loops (bootstrap, Monte Carlo, jackknife, local grids) are
// embarrassingly parallel. Exec::serial keeps the reference path around so
// tests can assert the OpenMP kernels produce bit-identical output.
enum class Exec { serial, parallel };

inline int default_threads() {
  if (const char* env = std::getenv("HAZFIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <typename Body>
void parallel_for(std::size_t n, Exec exec, const Body& body) {
#ifdef _OPENMP
  if (exec == Exec::parallel) {
    const int threads = default_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      body(static_cast<std::size_t>(i));
    return;
  }
#else
  (void)exec;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace hazfit
