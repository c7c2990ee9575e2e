#pragma once

#include <cstddef>
#include <functional>

namespace contrastex {

// Worker count from CONTRASTEX_WORKERS, falling back to hardware concurrency.
std::size_t default_worker_count();

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
// visited exactly once; the first exception thrown is rethrown on the caller.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace contrastex
