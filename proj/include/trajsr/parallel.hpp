#pragma once

#include <cstddef>
#include <functional>

namespace trajsr::par {

// Worker count for data-parallel helpers: TRAJSR_THREADS if set (clamped to
// [1, 64]), else 1. Invalid values fall back to 1.
int worker_threads();

// Runs f(i) for i in [0, n) on worker_threads() threads, static block
// partition. f must write only to slot i of its output; results are then
// independent of scheduling, so any reduction done afterwards in index
// order is bit-identical to a serial run.
void parallel_for(size_t n, const std::function<void(size_t)>& f);

}  // namespace trajsr::par
