#include "refldiff/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace refldiff {

int default_workers() {
    if (const char* env = std::getenv("REFLDIFF_WORKERS")) {
        int w = std::atoi(env);
        if (w >= 1) return w;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(4u, std::max(1u, hw)));
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    workers = std::min(workers, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        int lo = static_cast<int>(static_cast<long>(n) * w / workers);
        int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
        pool.emplace_back([&, lo, hi, w]() {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errs[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace refldiff
