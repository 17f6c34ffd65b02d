#pragma once

#include <cstddef>
#include <functional>

namespace distill {

// Worker cap from DISTILL_THREADS (unset or 0 = hardware concurrency).
std::size_t default_thread_count();

// Calls fn(i) for i in [0, n) on up to `threads` workers (0 = default).
// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace distill
