// SPDX-License-Identifier: Apache-2.0
#include "avoco/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace avoco {

int parallel_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace avoco
