#pragma once

#include "bspc/charts.hpp"

#include <cstddef>
#include <functional>

namespace bspc {

/// Runs fn(0) ... fn(n-1). Parallel execution uses an OpenMP dynamic schedule;
/// callers write results by index so the outcome matches the serial loop.
/// The first exception thrown by any task is rethrown after the loop.
void parallel_for(std::size_t n, Execution exec, const std::function<void(std::size_t)>& fn);

/// Caps the OpenMP team size; 0 keeps the runtime default.
void set_thread_count(int threads);

}  // namespace bspc
