#pragma once

#include <cstddef>
#include <functional>

namespace belllab {

/// Worker cap: BELLLAB_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.  Never affects results, only wall time.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across at most worker_count() threads.
/// Tasks must write only to their own slot; ordering of results is the
/// caller's job.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace belllab
