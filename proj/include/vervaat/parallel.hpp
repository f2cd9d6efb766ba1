#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "rng.hpp"

namespace vervaat {

inline unsigned worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Runs fn(i, rng) for i in [0, n) with rng = RngStream(seed, stream_base + i).
// Results come back indexed by replica, so the output does not depend on the
// number of threads or on scheduling.
template <class Fn>
auto map_replicas(std::size_t n, std::uint64_t seed, Fn fn, std::uint64_t stream_base = 0)
    -> std::vector<decltype(fn(std::size_t{}, std::declval<RngStream&>()))> {
    using R = decltype(fn(std::size_t{}, std::declval<RngStream&>()));
    std::vector<R> out(n);
    const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
    auto run = [&](std::size_t i) {
        RngStream rng(seed, stream_base + i);
        out[i] = fn(i, rng);
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    run(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace vervaat
