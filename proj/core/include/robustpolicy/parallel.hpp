#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace robustpolicy {

// Worker count: hardware concurrency capped by the ROBUST_POLICY_THREADS
// environment variable (>= 1).
inline int thread_width() {
    int width = static_cast<int>(std::thread::hardware_concurrency());
    if (width < 1) width = 1;
    if (const char* env = std::getenv("ROBUST_POLICY_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1 && cap < width) width = cap;
        } catch (...) {
            // Ignore malformed values; keep the hardware default.
        }
    }
    return width;
}

// Runs fn(i) for i in [0, count) on a fixed pool. Tasks are claimed through a
// striped schedule (worker w takes i = w, w + width, ...), so any task-level
// outputs must be written to pre-sized slots; results are then deterministic
// regardless of the worker count. Exceptions are rethrown (first by index).
inline void parallel_for(int count, const std::function<void(int)>& fn) {
    const int width = std::min(thread_width(), count < 1 ? 1 : count);
    if (width <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(width);
    for (int w = 0; w < width; ++w) {
        pool.emplace_back([&, w]() {
            for (int i = w; i < count; i += width) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (int i = 0; i < count; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
}

}  // namespace robustpolicy
