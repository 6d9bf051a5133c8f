#pragma once

#include <cstddef>

namespace semlab {

/// Upper bound on worker threads for all OpenMP kernels. 0 restores the
/// runtime default.
void set_thread_limit(int threads);
int thread_limit();

}  // namespace semlab
