#include "cyclesem/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace cyclesem {

namespace {
std::atomic<int> g_threads{0};

int effective_threads() {
    int n = g_threads.load();
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    return n;
}
}  // namespace

void set_num_threads(int n) { g_threads.store(n); }

int num_threads() { return effective_threads(); }

void parallel_blocks(size_t num_blocks, const std::function<void(size_t)>& fn) {
    if (num_blocks == 0) return;
    const int workers = static_cast<int>(std::min<size_t>(num_blocks, effective_threads()));
    if (workers <= 1) {
        for (size_t b = 0; b < num_blocks; ++b) fn(b);
        return;
    }
    // Work stealing via a shared counter. Which worker runs a block does not
    // affect its result, so scheduling order is irrelevant to the output.
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    auto body = [&] {
        for (;;) {
            const size_t b = next.fetch_add(1);
            if (b >= num_blocks) return;
            fn(b);
        }
    };
    for (int i = 0; i < workers - 1; ++i) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

}  // namespace cyclesem
