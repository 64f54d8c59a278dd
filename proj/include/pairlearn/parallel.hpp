#pragma once

// Static-partition parallel loop. Items are split into `jobs` contiguous
// chunks so per-thread accumulation buffers can be reduced in a fixed order,
// keeping results deterministic for a given job count.

#include <functional>
#include <thread>
#include <vector>

namespace pairlearn {

// fn(chunk_index, begin, end)
inline void parallel_chunks(int n_items, int jobs,
                            const std::function<void(int, int, int)>& fn)
{
    if (jobs < 1)
        jobs = 1;
    if (jobs > n_items)
        jobs = n_items > 0 ? n_items : 1;
    if (jobs == 1) {
        fn(0, 0, n_items);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    const int base = n_items / jobs;
    const int extra = n_items % jobs;
    int begin = 0;
    for (int c = 0; c < jobs; ++c) {
        const int len = base + (c < extra ? 1 : 0);
        const int end = begin + len;
        threads.emplace_back([&fn, c, begin, end] { fn(c, begin, end); });
        begin = end;
    }
    for (auto& t : threads)
        t.join();
}

} // namespace pairlearn
