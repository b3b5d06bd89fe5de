#pragma once

#include <cstddef>
#include <functional>

namespace peel {

/// Worker count: `requested` if positive, else PEELED_THREADS from the environment,
/// else the hardware concurrency.
int resolve_thread_count(int requested);

/// Runs body(i) for i in [0, count) over `threads` workers in contiguous chunks.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace peel
