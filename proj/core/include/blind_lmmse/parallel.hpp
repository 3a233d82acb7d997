#pragma once

#include <cstddef>
#include <functional>

namespace blmmse {

/// Number of worker threads for `jobs` independent tasks: BLIND_LMMSE_THREADS
/// when set, hardware concurrency otherwise, never more than `jobs`.
std::size_t worker_count(std::size_t jobs);

/// Runs fn(0) ... fn(count - 1) across worker threads. Tasks must write to
/// disjoint outputs; the first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace blmmse
