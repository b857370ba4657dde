#include "bspc/parallel.hpp"

#include <omp.h>

#include <exception>

namespace bspc {

void parallel_for(std::size_t n, Execution exec, const std::function<void(std::size_t)>& fn) {
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (exec == Execution::Serial) {
        for (std::ptrdiff_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
        return;
    }
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(bspc_parallel_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

void set_thread_count(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace bspc
