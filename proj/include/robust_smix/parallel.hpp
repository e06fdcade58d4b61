#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace robust_smix {

/// Worker count: the requested value (or hardware concurrency when 0), capped
/// by ROBUST_SMIX_THREADS when that variable holds a positive integer.
inline int resolve_workers(int requested) {
  int workers = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("ROBUST_SMIX_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) workers = std::min(workers, cap);
    } catch (const std::exception&) {
    }
  }
  return workers;
}

/// Runs fn(i) for i in [0, n) on contiguous chunks. Each index is handled by
/// exactly one worker, so per-index outputs are identical to a serial run.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn, std::size_t min_chunk = 256) {
  const std::size_t max_workers = std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk));
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), max_workers);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace robust_smix
