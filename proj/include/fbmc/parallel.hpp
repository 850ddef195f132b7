#pragma once
// Deterministic trial-level fan-out: workers pull indices from a counter and
// write only to per-index slots, so results do not depend on scheduling or
// thread count. Reduction happens after the join, in index order.

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fbmc {

inline void parallel_for_index(long n, int threads,
                               const std::function<void(long)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads > n) threads = static_cast<int>(n);
  if (threads <= 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      try {
        for (long i; (i = next.fetch_add(1)) < n;) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fbmc
