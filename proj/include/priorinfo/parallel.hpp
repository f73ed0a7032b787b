#pragma once

#include <cstddef>
#include <functional>

namespace priorinfo {

/// Worker count: PRIORINFO_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
unsigned thread_count();

/// Calls body(i) for i in [0, n) across worker threads. Each index writes to
/// its own slot, so results do not depend on scheduling. The first exception
/// thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace priorinfo
