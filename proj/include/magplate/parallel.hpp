#pragma once

#include <cstddef>
#include <functional>

namespace magplate {

// Worker count used by parallel_for; 1 means run inline.
void set_thread_count(int n);
int thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write
// disjoint outputs, so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace magplate
