#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace mfhb {

// Process-wide worker count for parallel maps. Reductions stay serial so
// results are bitwise independent of this setting.
int thread_count();
void set_thread_count(int n);

// Runs fn(i) for i in [begin, end) on contiguous chunks, one thread per chunk.
// Each index is written by exactly one thread; no shared reductions.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace mfhb
