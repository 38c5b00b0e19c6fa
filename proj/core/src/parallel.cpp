#include "admitml/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace admitml {

namespace {
std::atomic<unsigned> g_max_threads{0};
thread_local bool t_inside_parallel = false;
}  // namespace

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned max_threads() {
    const unsigned configured = g_max_threads.load();
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
    if (n == 0) return;
    const unsigned workers = max_threads();
    if (n == 1 || workers <= 1 || t_inside_parallel) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        t_inside_parallel = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
        t_inside_parallel = false;
    };

    const std::size_t thread_count = std::min<std::size_t>(workers, n);
    std::vector<std::thread> threads;
    threads.reserve(thread_count - 1);
    for (std::size_t t = 0; t + 1 < thread_count; ++t) threads.emplace_back(body);
    body();
    for (auto& t : threads) t.join();

    if (error) std::rethrow_exception(error);
}

}  // namespace admitml
