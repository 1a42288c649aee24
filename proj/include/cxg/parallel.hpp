#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cxg {

// Deterministic data parallelism: n items are split into `jobs` contiguous
// blocks and fn(block_index, begin, end) runs once per block. Callers must
// merge per-block results in block-index order so output is independent of
// scheduling (and of jobs, when the merge is associative over blocks).
template <class Fn>
void parallel_blocks(std::size_t n, int jobs, Fn&& fn) {
    if (jobs < 1) jobs = 1;
    std::size_t nblocks = std::min<std::size_t>(static_cast<std::size_t>(jobs), n ? n : 1);
    if (nblocks <= 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::size_t base = n / nblocks, rem = n % nblocks;
    std::vector<std::thread> threads;
    threads.reserve(nblocks);
    std::vector<std::exception_ptr> errors(nblocks);
    std::size_t begin = 0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        std::size_t len = base + (b < rem ? 1 : 0);
        std::size_t end = begin + len;
        threads.emplace_back([&fn, &errors, b, begin, end] {
            try {
                fn(b, begin, end);
            } catch (...) {
                errors[b] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace cxg
