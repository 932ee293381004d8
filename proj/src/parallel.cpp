#include "q1d/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace q1d {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n));
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

double pairwise(const double* v, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    const std::size_t h = n / 2;
    return pairwise(v, h) + pairwise(v + h, n - h);
}

}  // namespace

double pairwise_sum(const std::vector<double>& v) { return pairwise(v.data(), v.size()); }

}  // namespace q1d
