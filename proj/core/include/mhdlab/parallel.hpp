#pragma once
// Deterministic fan-out of independent jobs over a small thread pool.

#include <cstddef>
#include <functional>

namespace mhdlab {

// MHDLAB_WORKERS if set (clamped to [1, 64]); otherwise hardware
// concurrency; otherwise 1.
int worker_count();

// Runs fn(i) for every i in [0, count). Jobs must be independent and
// write only to their own output slot, so results do not depend on the
// worker count. The first exception thrown by a job is rethrown after
// all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace mhdlab
