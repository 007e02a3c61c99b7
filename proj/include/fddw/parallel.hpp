#pragma once

#include <cstdint>
#include <functional>

namespace fddw {

// Number of worker threads parallel_for may use. Reads FDDW_THREADS on every
// call so tests can change it at runtime; falls back to the hardware
// concurrency (capped at 8) when unset or invalid.
int max_threads();

// Runs fn(begin, end) over a static partition of [0, n). Every index is
// processed exactly once by exactly one thread, so any kernel that writes
// only to its own indices produces bit-identical results for any thread
// count.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace fddw
