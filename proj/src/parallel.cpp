#include "skiprun/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace skiprun {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

std::size_t threads_from_env() {
    const char* value = std::getenv("SKIPRUN_THREADS");
    if (value == nullptr || *value == '\0') return 1;
    try {
        const long long n = std::stoll(value);
        return n > 0 ? static_cast<std::size_t>(n) : 1;
    } catch (const std::exception&) {
        return 1;
    }
}

}  // namespace skiprun
