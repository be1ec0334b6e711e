#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace relprop {

// Worker-count capability handed down from the CLI.  parallel_for splits
// [0, n) into contiguous chunks; results must not depend on the split, so
// callers merge per-chunk output in chunk order.
struct Executor {
    unsigned jobs = 1;

    template <typename Fn>  // Fn(std::size_t begin, std::size_t end, unsigned chunk)
    void for_chunks(std::size_t n, Fn&& fn) const {
        unsigned workers = std::max(1u, jobs);
        if (n == 0) return;
        workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
        if (workers == 1) {
            fn(0, n, 0);
            return;
        }
        std::size_t chunk = (n + workers - 1) / workers;
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            std::size_t begin = static_cast<std::size_t>(w) * chunk;
            std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            threads.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
        }
        for (auto& t : threads) t.join();
    }
};

}  // namespace relprop
