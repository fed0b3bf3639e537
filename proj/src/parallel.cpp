#include "fabisearch/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace fabisearch {

namespace {
thread_local bool in_parallel_region = false;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master);
    for (auto v : path) h = mix64(h ^ mix64(v + 0x632be59bd9b4e019ULL));
    return h;
}

unsigned resolve_threads(int hint) noexcept {
    if (hint > 0) return static_cast<unsigned>(hint);
    if (const char* env = std::getenv("FABISEARCH_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int thread_hint, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    const unsigned threads =
        in_parallel_region ? 1u : static_cast<unsigned>(std::min<std::size_t>(resolve_threads(thread_hint), n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        in_parallel_region = true;
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        in_parallel_region = false;
    };

    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();

    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace fabisearch
