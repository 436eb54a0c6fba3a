#include "trajsr/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace trajsr::par {

int worker_threads() {
    const char* env = std::getenv("TRAJSR_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    try {
        int n = std::stoi(env);
        if (n < 1) return 1;
        return n > 64 ? 64 : n;
    } catch (const std::exception&) {
        return 1;
    }
}

void parallel_for(size_t n, const std::function<void(size_t)>& f) {
    if (n == 0) return;
    size_t workers = static_cast<size_t>(worker_threads());
    if (workers > n) workers = n;
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::vector<std::exception_ptr> errors(workers);
    size_t chunk = (n + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        size_t lo = w * chunk;
        size_t hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) break;
        pool.emplace_back([&, w, lo, hi]() {
            try {
                for (size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace trajsr::par
