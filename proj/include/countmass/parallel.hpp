#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace countmass {

// Runs fn(i) for every i in [0, count) across worker threads (threads == 0
// picks the hardware default). Each index is handled exactly once; callers
// store per-index results and reduce serially afterward, which keeps reports
// deterministic regardless of scheduling. The first exception thrown by fn is
// rethrown on the calling thread after all workers finish.
inline void parallel_for_index(std::uint64_t count, unsigned threads,
                               const std::function<void(std::uint64_t)>& fn) {
  unsigned workers = threads ? threads : std::thread::hardware_concurrency();
  if (workers < 1) workers = 1;
  if (count < workers) workers = static_cast<unsigned>(count);
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace countmass
