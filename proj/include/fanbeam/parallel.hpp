#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace fanbeam {

/// Degree of parallelism. 0 picks std::thread::hardware_concurrency().
struct ExecPolicy {
    int threads = 0;

    int resolved() const noexcept {
        if (threads > 0) return threads;
        unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : static_cast<int>(hc);
    }
};

/// Runs body(i) for i in [0, n) on contiguous blocks. Every index is handled by
/// exactly one worker, so results written per index do not depend on the
/// thread count.
template <class Body>
void parallel_for(std::size_t n, ExecPolicy policy, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(policy.resolved()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace fanbeam
