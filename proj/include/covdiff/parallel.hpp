#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace covdiff {

// Resolve a degree-of-parallelism hint: 0 means "use COVDIFF_THREADS, else
// hardware_concurrency".
inline int resolve_threads(int hint) {
    if (hint > 0) return hint;
    if (const char* env = std::getenv("COVDIFF_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static-chunked parallel loop over [0, count). Each index is processed by
// exactly one thread; the body must only write to state owned by its index,
// which keeps results identical at any thread count.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& body) {
    threads = resolve_threads(threads);
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::size_t nthreads = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([=, &body] {
            for (std::size_t i = t; i < count; i += nthreads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace covdiff
