#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace anderson {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work is
/// assigned in contiguous blocks by index so callers that write result[i]
/// and reduce in index order get bit-identical output for any worker count.
/// The first exception thrown by any body is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace anderson
