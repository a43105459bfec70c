#include "herald/parallel.hpp"

#include <stdexcept>

#ifdef HERALD_HAVE_OPENMP
#include <omp.h>
#endif

namespace herald {

void set_thread_count(int n) {
  if (n < 1) throw std::invalid_argument("thread count must be at least 1");
#ifdef HERALD_HAVE_OPENMP
  omp_set_num_threads(n);
#endif
}

int thread_count() {
#ifdef HERALD_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace herald
