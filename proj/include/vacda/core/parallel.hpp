#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vacda::kernels {

// Process-wide switch between the OpenMP kernels and the serial reference
// implementations.  Every kernel computes each output element in a fixed
// serial order inside one thread, so flipping this switch (or changing the
// thread count) never changes a single bit of the results; it only changes
// how the independent outputs are distributed over threads.
bool parallel_enabled();

// threads == 0 selects the serial reference path; threads > 0 enables the
// OpenMP path with that many threads; threads < 0 enables it with the
// OpenMP default.
void set_threads(int threads);

int max_threads();

}  // namespace vacda::kernels
