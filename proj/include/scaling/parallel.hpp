#pragma once

#include <cstddef>
#include <functional>

namespace scaling {

// Worker count: SCALING_FRONTIER_THREADS if set and positive, otherwise the
// hardware concurrency (at least 1).
std::size_t thread_count();

// Runs body(i) for i in [0, count). Work items must write only to their own
// output slot; the caller reduces in index order so results do not depend on
// the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace scaling
