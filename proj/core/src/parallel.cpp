#include "mwlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mwlab {

namespace {
std::atomic<int> g_jobs{1};
}

void set_default_jobs(int jobs) { g_jobs = std::max(1, jobs); }
int default_jobs() { return g_jobs; }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int jobs) {
    if (jobs < 0) jobs = default_jobs();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto run = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace mwlab
