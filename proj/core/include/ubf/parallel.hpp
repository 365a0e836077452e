#pragma once

#include <cstddef>
#include <functional>

namespace ubf {

/// Runs body(0..n-1) on up to hardware_concurrency threads. Calls made from
/// inside a running parallel_for execute serially on the calling thread, so
/// nested use (replicates -> folds -> trees) does not oversubscribe.
/// Results must be written to per-index slots; the first exception thrown by
/// any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Override the worker count (0 restores the hardware default).
void set_max_threads(unsigned threads);

}  // namespace ubf
