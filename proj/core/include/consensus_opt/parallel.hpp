#pragma once

#include <cstddef>
#include <functional>

namespace consensus_opt {

// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
// workers. Work is only ever partitioned by index, so callers writing to
// per-index slots get identical results for any thread count. The first
// exception thrown by a worker is rethrown on the calling thread.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

// Hardware concurrency, at least 1.
int default_thread_count();

}  // namespace consensus_opt
