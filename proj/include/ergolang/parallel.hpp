#pragma once

#include <cstdlib>
#include <atomic>
#include <mutex>
#include <thread>
#include <vector>

namespace ergolang {

// Worker count for path-parallel ensembles: ERGOLANG_THREADS when set,
// otherwise the hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("ERGOLANG_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n). Results must be written to per-index slots so
// the outcome is independent of scheduling; exceptions propagate.
template <class Fn>
void parallel_for_index(int n, Fn&& fn) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<int> next{0};
    std::mutex error_mutex;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ergolang
