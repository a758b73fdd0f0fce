#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gabp {

// Worker cap for per-message parallel sweeps. GABP_THREADS=0/unset means
// serial; anything larger spawns that many workers (clamped to hardware).
inline int thread_cap() {
    static const int cap = [] {
        const char* env = std::getenv("GABP_THREADS");
        if (!env) return 1;
        int n = std::atoi(env);
        if (n <= 1) return 1;
        const int hw = static_cast<int>(std::thread::hardware_concurrency());
        return hw > 0 ? std::min(n, hw) : n;
    }();
    return cap;
}

// Chunked parallel loop over [0, n). Each index must write only its own slot:
// results are then identical under any worker count, so a run is
// deterministic whether or not GABP_THREADS is set.
template <typename Fn>
inline void parallel_for(int n, Fn&& fn) {
    const int workers = std::min(thread_cap(), n);
    if (workers <= 1 || n < 32) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace gabp
