#pragma once

#include <cstddef>
#include <functional>

namespace reidfuse {

/// Worker count used when a caller passes 0. Reads REIDFUSE_THREADS if set,
/// otherwise std::thread::hardware_concurrency() (at least 1).
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count) across up to `threads` workers.
/// Indices are handed out in contiguous blocks; body must only write state
/// owned by index i. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace reidfuse
