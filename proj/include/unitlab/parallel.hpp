#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace unitlab {

inline int resolveThreads(int threads) {
    if (threads > 0) return threads;
    unsigned int hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// The chunk layout is independent of the thread count, so any reduction that
// fills per-chunk slots and combines them in chunk order gives bit-identical
// results for every value of `threads`. fn must only write to state owned by
// its chunk.
inline void parallelChunks(std::size_t n, std::size_t chunk_size, int threads,
                           const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    int workers = resolveThreads(threads);
    if (workers <= 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(workers), n_chunks);
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace unitlab
