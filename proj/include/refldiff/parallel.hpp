#pragma once

#include <functional>

namespace refldiff {

/// Worker count: REFLDIFF_WORKERS env var when set, else min(hardware, 4).
int default_workers();

/// Runs fn(i) for i in [0, n) across `workers` threads in contiguous
/// chunks. Results must be written to per-index slots; the chunking makes
/// outputs independent of scheduling. Exceptions are rethrown on the caller.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace refldiff
