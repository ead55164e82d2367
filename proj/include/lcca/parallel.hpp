#pragma once

#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lcca {

/// Runs fn(i) for i in [0, count). Iterations must be independent; results
/// must be written to per-index slots so the outcome does not depend on the
/// thread count. The first exception thrown by any iteration is rethrown
/// after the loop completes.
template <class Fn>
void parallel_for_index(std::ptrdiff_t count, Fn&& fn) {
  std::exception_ptr first_error = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(i);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(lcca_parallel_for_error)
#endif
      {
        if (!first_error) first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace lcca
