#pragma once

#include <cstddef>
#include <functional>

namespace csrt {

/// Worker count from CSRT_THREADS (unset or 0 = hardware concurrency).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Callers
/// write results into slot i, so output order never depends on scheduling.
/// The first exception thrown by any task is rethrown after all join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace csrt
