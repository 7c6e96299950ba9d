#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
inline void omp_set_num_threads(int) {}
#endif

namespace fmeas {

// Execution policy for the data-parallel kernels. Serial is the reference
// path; results must be identical under both policies.
enum class Exec { serial, openmp };

template <typename Fn>
void parallel_for(std::int64_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::openmp) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace fmeas
