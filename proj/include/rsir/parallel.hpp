#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rsir {

/// Worker count from RSIR_WORKERS, else the hardware concurrency (min 1).
std::size_t worker_count();

/// Splits [0, n) into contiguous chunks, one per worker, and calls
/// fn(begin, end) on each. Results must be written to disjoint slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t workers = worker_count()) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers <= 1) {
        if (n > 0) fn(std::size_t{0}, n);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    threads.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace rsir
