#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cwbell {

// Runs body(i) for i in [0, count) on up to `workers` threads. Work is split
// into contiguous chunks; callers write results by index so output order never
// depends on the worker count.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& body) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const std::size_t w = std::min<std::size_t>(workers, count);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(w);
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
        const std::size_t lo = count * k / w;
        const std::size_t hi = count * (k + 1) / w;
        pool.emplace_back([lo, hi, k, &body, &errs] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errs[k] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace cwbell
