#pragma once

#include <cstddef>
#include <functional>

namespace rdc {

/// Worker count from the RDC_THREADS environment variable, else the
/// hardware concurrency (at least 1).
std::size_t default_thread_count();

/// Calls body(i) for i in [0, n) on up to `threads` workers (0 = default).
/// Work items are independent; callers store results by index. If bodies
/// throw, the exception from the lowest index is rethrown after all workers
/// finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace rdc
