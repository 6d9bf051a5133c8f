#include "semlab/parallel.hpp"

#include <omp.h>

namespace semlab {

namespace {
int g_default_threads = omp_get_max_threads();
}

void set_thread_limit(int threads) {
    omp_set_num_threads(threads > 0 ? threads : g_default_threads);
}

int thread_limit() { return omp_get_max_threads(); }

}  // namespace semlab
