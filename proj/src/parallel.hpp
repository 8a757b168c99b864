#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vortexlayer::detail {

// Worker count: the request (0 means hardware concurrency), capped by the
// VORTEXLAYER_THREADS environment variable and by the amount of work.
inline std::size_t worker_count(std::size_t requested, std::size_t work_items) {
  std::size_t n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* cap = std::getenv("VORTEXLAYER_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(cap, &end, 10);
    if (end != cap && value > 0) n = std::min(n, static_cast<std::size_t>(value));
  }
  return std::max<std::size_t>(1, std::min(n, work_items));
}

// Calls fn(item, worker) for item in [0, count). Items are handed out
// dynamically; the first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  const std::size_t workers = worker_count(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, std::size_t{0});
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&](std::size_t worker) {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i, worker);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body, w);
  body(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace vortexlayer::detail
