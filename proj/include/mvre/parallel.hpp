#pragma once

#include <functional>

namespace mvre {

/// Calls fn(i) for i in [0, count) on up to `workers` threads. Indices are
/// handed out in order; results must be written to per-index slots. The first
/// exception thrown by a job is rethrown after all workers finish.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

/// Worker count for `jobs` jobs: MVRE_THREADS if set and positive, else `jobs`.
int pool_size(int jobs);

/// Worker count for many small jobs: MVRE_THREADS if set and positive, else
/// the hardware concurrency; never more than `jobs`.
int hardware_pool_size(int jobs);

}  // namespace mvre
