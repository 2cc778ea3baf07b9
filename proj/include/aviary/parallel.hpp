#pragma once

#include <cstddef>
#include <functional>

namespace aviary {

// AVIARY_SENSE_THREADS when set to a positive integer, else the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
// runs exactly once; callers write results to per-index slots so output does
// not depend on scheduling. If any body throws, the exception from the lowest
// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace aviary
