#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace chaosrough {

// Runs fn(i) for every i in [0, count) on the requested number of worker
// threads. Each index must own its output (one slot per index, randomness from
// a per-index stream) so the result is identical for every thread count;
// callers then merge the slots in index order. threads <= 0 asks for the
// hardware concurrency. The first exception thrown by any fn is rethrown.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count < 0) throw std::invalid_argument("parallel_for: negative count");
  if (count == 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (threads > count) threads = count;

  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::mutex mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < count; i += threads) {
          {
            std::lock_guard<std::mutex> lock(mu);
            if (first_error) return;
          }
          fn(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace chaosrough
