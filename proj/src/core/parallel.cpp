#include "vacda/core/parallel.hpp"

#include <atomic>

namespace vacda::kernels {

namespace {
#ifdef _OPENMP
std::atomic<bool> g_parallel{true};
#else
std::atomic<bool> g_parallel{false};
#endif
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void set_threads(int threads) {
    if (threads == 0) {
        g_parallel.store(false, std::memory_order_relaxed);
        return;
    }
#ifdef _OPENMP
    g_parallel.store(true, std::memory_order_relaxed);
    if (threads > 0) omp_set_num_threads(threads);
#else
    g_parallel.store(false, std::memory_order_relaxed);
#endif
}

int max_threads() {
#ifdef _OPENMP
    return parallel_enabled() ? omp_get_max_threads() : 1;
#else
    return 1;
#endif
}

}  // namespace vacda::kernels
