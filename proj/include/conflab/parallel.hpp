#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace conflab {

/// Runs fn(i) for i in [0, count) on up to `threads` workers and returns the
/// results in index order. Work is handed out in small chunks through an
/// atomic counter; since each result depends only on its index, the output is
/// independent of the schedule and of the thread count.
template <class Fn>
auto parallel_map(std::size_t count, unsigned threads, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using R = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<R> out(count);
    if (count == 0) return out;
    threads = std::max(1u, threads);
    if (threads == 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    const std::size_t chunk = std::max<std::size_t>(1, count / (threads * 16));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const std::size_t end = std::min(count, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

/// Like parallel_map for callables returning bool; returns the success count.
template <class Fn>
std::size_t parallel_count(std::size_t count, unsigned threads, Fn&& fn) {
    auto hits = parallel_map(count, threads, [&](std::size_t i) -> unsigned char {
        return fn(i) ? 1 : 0;
    });
    std::size_t total = 0;
    for (auto h : hits) total += h;
    return total;
}

}  // namespace conflab
