#include "cpsr/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace cpsr {

unsigned worker_count() {
    unsigned n = 0;
    if (const char* env = std::getenv("CPSR_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = static_cast<unsigned>(v);
    }
    if (n == 0) n = std::thread::hardware_concurrency();
    return n > 0 ? n : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();

    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace cpsr
