#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fracgrad {

/// Worker cap from FRACGRAD_THREADS (>= 1); hardware concurrency otherwise.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("FRACGRAD_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls body(i) for i in [0, n) on up to `threads` workers (0 = worker_count()).
/// Iterations must write to disjoint slots; the first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, const Body& body) {
  if (threads == 0) threads = worker_count();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fracgrad
