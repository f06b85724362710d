#pragma once

#include <cstddef>
#include <functional>

namespace intent_lab {

// Worker count: INTENT_LAB_THREADS when set (>= 1), otherwise the hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, n). Each index is handled exactly once; callers write results into
// preallocated slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace intent_lab
