#include "topomap/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace topomap {
namespace {

int default_threads() {
    if (const char* env = std::getenv("TOPOMAP_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<int>& thread_setting() {
    static std::atomic<int> value{default_threads()};
    return value;
}

}  // namespace

int num_threads() { return thread_setting().load(); }

void set_num_threads(int n) {
    if (n < 1) throw std::invalid_argument("thread count must be >= 1");
    thread_setting().store(n);
}

void parallel_for(std::size_t count, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (count == 0) return;
    grain = std::max<std::size_t>(grain, 1);
    const std::size_t chunks = (count + grain - 1) / grain;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(num_threads()), chunks);

    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = c * grain;
        body(begin, std::min(count, begin + grain));
    };

    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = chunks;
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace topomap
