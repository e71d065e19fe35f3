#pragma once

#include <cstdint>
#include <functional>

namespace plaus {

// Runs fn(i) for i in [0, count) across at most `workers` threads using
// contiguous index chunks.  Callers write results into preallocated slots
// indexed by i, so the outcome is independent of scheduling.  workers <= 1
// (or 0 meaning "auto" resolving to 1 core) runs inline.
void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& fn);

// Resolves a worker-count request: 0 means hardware concurrency.
int resolve_workers(int requested);

}  // namespace plaus
