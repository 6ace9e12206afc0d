#include "copmarkov/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "internal.hpp"

namespace copmarkov {
namespace {

std::atomic<std::size_t> g_threads{1};

}  // namespace

void set_worker_threads(std::size_t count) { g_threads.store(std::max<std::size_t>(count, 1)); }

std::size_t worker_threads() { return g_threads.load(); }

namespace detail {

void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t threads = std::min(worker_threads(), std::max<std::size_t>(count / 64, 1));
    if (threads <= 1) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail
}  // namespace copmarkov
