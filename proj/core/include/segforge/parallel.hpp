#pragma once

#include <cstdint>
#include <functional>

namespace segforge {

/// 0 -> hardware concurrency, otherwise the requested count (min 1).
int resolve_workers(int requested);

/// Runs fn(i) for i in [0, n) across up to `workers` threads with static
/// chunking. Results must be written to per-index storage; any reduction is
/// the caller's job (done in index order, so outcomes do not depend on the
/// worker count). Exceptions from workers are rethrown on the calling thread.
void parallel_for(int64_t n, int workers, const std::function<void(int64_t)>& fn);

} // namespace segforge
