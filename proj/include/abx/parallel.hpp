#pragma once

#include <omp.h>

namespace abx {

/// Worker count used by the parallel loops; 0 or negative means all available.
inline int resolve_workers(int requested) {
  return requested > 0 ? requested : omp_get_max_threads();
}

}  // namespace abx
