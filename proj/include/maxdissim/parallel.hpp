#pragma once

#include <cstddef>
#include <functional>

namespace maxdissim {

/// Worker count: MAXDISSIM_THREADS if set, else the hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// processed exactly once; callers write results into slot i so output order
/// never depends on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int workers = worker_count());

}  // namespace maxdissim
