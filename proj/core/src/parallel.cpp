#include "segforge/parallel.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace segforge {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int64_t n, int workers, const std::function<void(int64_t)>& fn) {
    if (n <= 0) return;
    const int w = std::min<int64_t>(std::max(workers, 1), n);
    if (w == 1) {
        for (int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(w));
    threads.reserve(static_cast<size_t>(w));
    for (int t = 0; t < w; ++t) {
        const int64_t lo = n * t / w;
        const int64_t hi = n * (t + 1) / w;
        threads.emplace_back([&, t, lo, hi] {
            try {
                for (int64_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace segforge
