#pragma once

#include <cstddef>
#include <functional>

namespace gparse {

// Runs f(0..n-1) on up to `jobs` threads. The first exception is rethrown
// after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

}  // namespace gparse
