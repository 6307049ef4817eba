#pragma once

#include <cstddef>
#include <functional>

namespace ratefactor {

// Worker count: RATE_FACTOR_THREADS environment variable when set (>= 1),
// otherwise hardware concurrency.
int effective_threads();

// Runs fn(i) for i in [0, n), possibly concurrently. fn must write only to
// slot i of any shared output so results are identical at any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ratefactor
