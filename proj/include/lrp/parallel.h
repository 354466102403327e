#ifndef LRP_PARALLEL_H_
#define LRP_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lrp {

inline int DefaultWorkers() {
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

// Calls body(i) for every i in [0, count) on up to `workers` threads. Each
// index is visited exactly once; callers write results into per-index slots
// and reduce afterwards, so the outcome does not depend on the worker count.
template <typename Body>
void ParallelFor(std::size_t count, int workers, Body&& body) {
  const std::size_t threads =
      std::min<std::size_t>(std::max(1, workers), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lrp

#endif  // LRP_PARALLEL_H_
