#pragma once

#include <cstddef>
#include <functional>

namespace tsnn {

/// Global cap on worker threads; 0 means hardware concurrency.
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Runs fn(i) for i in [0, n) across up to max_threads() workers in
/// contiguous chunks. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tsnn
