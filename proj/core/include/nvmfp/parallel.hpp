#pragma once

#include <cstddef>
#include <functional>

namespace nvmfp {

// Upper bound on worker threads used by parallel_for. 0 means
// std::thread::hardware_concurrency().
void set_max_jobs(std::size_t jobs) noexcept;
std::size_t max_jobs() noexcept;

// Calls body(i) for i in [0, n). Each index is handled exactly once; results
// must be written to per-index slots so the outcome is independent of the
// number of workers. The first exception thrown by a worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nvmfp
