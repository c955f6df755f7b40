#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace pcm {

inline int& thread_count_ref() {
  static int t = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return t;
}

inline void set_thread_count(int t) { thread_count_ref() = std::max(1, t); }
inline int thread_count() { return thread_count_ref(); }

// Fork-join loop over [begin, end) in contiguous blocks, one block per worker.
// Block boundaries depend only on (range, worker count), so any per-block
// accumulation merged in block order is reproducible.
inline void parallel_for(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t, std::int64_t, int)>& body) {
  std::int64_t len = end - begin;
  if (len <= 0) return;
  int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), len));
  if (workers <= 1) {
    body(begin, end, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  std::int64_t chunk = (len + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = begin + chunk * w;
    std::int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi, w] { body(lo, hi, w); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace pcm
