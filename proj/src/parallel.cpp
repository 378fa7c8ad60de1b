#include "shapefilt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace shapefilt {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned n) { g_threads.store(std::max(1u, n)); }

unsigned thread_count() { return g_threads.load(); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    if (end <= begin) return;
    const std::size_t n = end - begin;
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        body(begin, end);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t b = begin + w * chunk;
        const std::size_t e = std::min(end, b + chunk);
        if (b < e) pool.emplace_back(body, b, e);
    }
    body(begin, std::min(end, begin + chunk));
    for (auto& t : pool) t.join();
}

} // namespace shapefilt
