#include "nvmfp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nvmfp {

namespace {
std::atomic<std::size_t> g_max_jobs{0};
}

void set_max_jobs(std::size_t jobs) noexcept { g_max_jobs.store(jobs); }

std::size_t max_jobs() noexcept {
  std::size_t j = g_max_jobs.load();
  if (j == 0) j = std::max(1u, std::thread::hardware_concurrency());
  return j;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(max_jobs(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace nvmfp
