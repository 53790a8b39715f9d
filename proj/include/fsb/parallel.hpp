#pragma once

// Deterministic batch parallelism: items are split into contiguous chunks,
// workers own disjoint output slots, and callers reduce in index order, so
// results do not depend on the worker count.

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace fsb {

int thread_count();           // current worker cap (defaults to hw concurrency)
void set_thread_count(int n); // n <= 0 resets to the default

inline void parallel_for(int n_items, const std::function<void(int)>& fn) {
    const int workers = std::min(thread_count(), n_items);
    if (workers <= 1) {
        for (int i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (n_items + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk, hi = std::min(n_items, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fsb
