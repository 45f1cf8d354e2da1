#pragma once

#include <cstddef>
#include <functional>

namespace warpcenter {

/// Worker count used when callers pass 0: the WARPCENTER_THREADS environment
/// variable if set to a positive integer, otherwise std::thread::hardware_concurrency().
std::size_t default_thread_count();

/// Resolves a requested count (0 = default) to at least 1.
std::size_t resolve_threads(std::size_t requested);

/// Runs body(worker, begin, end) over contiguous slices of [0, count).
/// Slices are fixed by (count, workers); body must not depend on scheduling.
/// The first exception thrown by any worker is rethrown after all join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t worker, std::size_t begin, std::size_t end)>& body);

}  // namespace warpcenter
