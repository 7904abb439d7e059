#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace proverb {

// Runs fn(i) for every i in [0, n) on up to `workers` threads. The first
// exception thrown by any task is rethrown after all threads join; remaining
// unstarted tasks are skipped once a task has failed.
template <typename Fn>
void parallel_for(size_t n, size_t workers, Fn&& fn) {
    workers = std::clamp<size_t>(workers, 1, std::max<size_t>(n, 1));
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                for (size_t i = next++; i < n && !failed.load(); i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace proverb
