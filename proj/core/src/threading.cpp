#include "ctsynth/threading.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace ctsynth {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) { g_threads.store(std::max(1, n)); }

int thread_count() { return g_threads.load(); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
    const int nt = std::min<std::int64_t>(g_threads.load(), n);
    if (nt <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        const std::int64_t begin = n * t / nt;
        const std::int64_t end = n * (t + 1) / nt;
        workers.emplace_back([&fn, begin, end] {
            for (std::int64_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

} // namespace ctsynth
