#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace qmw {

/// Runs fn(worker, begin, end) over `jobs` contiguous chunks of [0, count).
/// Chunk boundaries depend only on (count, jobs), so per-worker partial
/// results merged in worker order are reproducible.
template <typename Fn>
void parallel_chunks(std::ptrdiff_t count, int jobs, Fn&& fn)
{
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::ptrdiff_t>(count, 1))));
    if (jobs == 1) {
        fn(0, std::ptrdiff_t{0}, count);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        const std::ptrdiff_t begin = count * w / jobs;
        const std::ptrdiff_t end = count * (w + 1) / jobs;
        workers.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
    }
}

} // namespace qmw
