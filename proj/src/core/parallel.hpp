#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sdr {

// Runs f(0..count-1) on up to `workers` threads. Tasks must be independent;
// callers keep results in index-addressed slots so the merge order is fixed
// and outputs stay deterministic regardless of the worker count. The first
// exception wins and is rethrown on the calling thread.
template <typename F>
void parallel_for(int count, int workers, F&& f) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto body = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error) return;
            }
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    int n_threads = std::min(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sdr
