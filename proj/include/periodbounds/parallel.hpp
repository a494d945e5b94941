#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace periodbounds {

/// Worker count: PERIODBOUNDS_THREADS when set to a positive integer, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char *env = std::getenv("PERIODBOUNDS_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception &) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Calls f(i) for i in [0, count) on up to `workers` threads in contiguous chunks.
/// Callers write results by index, so output never depends on scheduling.
template <typename F>
void parallel_for(std::size_t count, F &&f, unsigned workers = worker_count()) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  const std::size_t used = std::min<std::size_t>(workers, count);
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = count * w / used;
      const std::size_t end = count * (w + 1) / used;
      try {
        for (std::size_t i = begin; i < end; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

} // namespace periodbounds
