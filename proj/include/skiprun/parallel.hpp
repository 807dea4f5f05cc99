#pragma once

#include <cstddef>
#include <functional>

namespace skiprun {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is handled
// exactly once; callers write results into per-index slots so aggregation
// order never depends on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

// SKIPRUN_THREADS if set to a positive integer, else 1.
std::size_t threads_from_env();

}  // namespace skiprun
