#pragma once

#include <cstddef>
#include <functional>

namespace cpsr {

// Worker cap: CPSR_THREADS environment variable; 0 or unset means all
// hardware threads.
unsigned worker_count();

// Runs fn(i) for i in [0, n). Each index must be independent and write only
// into caller-owned slot i, which keeps results deterministic regardless of
// scheduling. If any calls throw, the exception from the lowest index is
// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace cpsr
