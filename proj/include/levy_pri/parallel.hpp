#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace levy_pri {

/// Runs `fn(begin, end)` over fixed-size blocks of [0, n) on up to `threads`
/// workers and returns the per-block results in block order. Block boundaries
/// do not depend on the thread count, so a sequential fold over the result is
/// bit-identical for any number of threads.
template <class Fn>
auto run_blocks(std::size_t n, std::size_t block_size, unsigned threads, Fn&& fn) {
    using Partial = decltype(fn(std::size_t{0}, std::size_t{0}));
    block_size = std::max<std::size_t>(block_size, 1);
    const std::size_t n_blocks = (n + block_size - 1) / block_size;
    std::vector<Partial> out(n_blocks);
    if (n_blocks == 0) return out;

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                const std::size_t begin = b * block_size;
                out[b] = fn(begin, std::min(n, begin + block_size));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_blocks;
            }
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace levy_pri
