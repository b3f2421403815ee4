#pragma once

#include <cstddef>
#include <functional>

namespace supermap {

// Number of worker threads: SUPERMAP_THREADS if set, else hardware concurrency.
int thread_budget();

// Runs fn(i) for i in [0, n). Work items must be independent; results keyed
// by index stay deterministic regardless of scheduling. Exceptions from
// workers are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace supermap
