#include "locmix/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace locmix {

namespace {
std::atomic<std::size_t> g_thread_limit{0};
}

void set_thread_limit(std::size_t threads) { g_thread_limit = threads; }

std::size_t thread_limit()
{
    std::size_t limit = g_thread_limit;
    if (limit == 0)
        limit = std::max(1u, std::thread::hardware_concurrency());
    return limit;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task)
{
    const std::size_t workers = std::min(thread_limit(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            task(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);
}

}  // namespace locmix
