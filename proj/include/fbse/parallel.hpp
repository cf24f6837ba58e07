#pragma once
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fbse {

// Worker count from FBSE_THREADS; defaults to 1 (deterministic single-threaded sweeps).
inline int thread_count() {
    if (const char* env = std::getenv("FBSE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

// Index-sharded parallel map over [begin, end). Work items must be independent;
// callers own output ordering (write by index).
inline void parallel_for(int begin, int end, const std::function<void(int)>& fn) {
    const int n = thread_count();
    if (n <= 1 || end - begin <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(n));
    for (int w = 0; w < n; ++w)
        workers.emplace_back([&, w] {
            for (int i = begin + w; i < end; i += n) fn(i);
        });
    for (auto& t : workers) t.join();
}

} // namespace fbse
