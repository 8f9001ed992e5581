#pragma once

#include <cstdint>
#include <functional>

namespace ctsynth {

// Global worker count for kernel-level data parallelism. All parallel loops
// in the project partition their index range into disjoint chunks with
// serial reductions inside each chunk, so results are bit-identical for any
// thread count. Default is 1.
void set_thread_count(int n);
int thread_count();

// Runs fn(i) for i in [0, n). With thread_count() == 1 this is a plain loop.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

} // namespace ctsynth
