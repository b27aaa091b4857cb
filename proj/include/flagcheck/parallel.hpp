#pragma once

#include <cstddef>
#include <functional>

namespace flagcheck {

// Worker cap: FLAGCHECK_THREADS when set, otherwise hardware concurrency.
std::size_t default_worker_count();

// Runs fn(0..n-1) across up to `workers` threads. Work items must key any
// randomness off their own index, so the outcome is worker-count invariant.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace flagcheck
