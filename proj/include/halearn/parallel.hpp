#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace halearn {

/// Worker count: explicit value if > 0, else HALEARN_THREADS, else 1.
inline std::size_t resolve_threads(long requested) {
    if (requested > 0) return static_cast<std::size_t>(requested);
    if (const char* env = std::getenv("HALEARN_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

/// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
/// write results into per-index slots so the outcome does not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace halearn
