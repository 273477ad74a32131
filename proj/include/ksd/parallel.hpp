#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "ksd/errors.hpp"

namespace ksd {

// 0 means one worker per hardware thread.
[[nodiscard]] inline int resolve_threads(int requested) {
  if (requested < 0) throw input_error("threads must be >= 0");
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs f(i) for every i in [begin, end). Work splits into contiguous chunks,
// one per worker, so the set of calls is the same for any thread count;
// determinism is then up to the caller writing to per-index slots.
template <class F>
inline void parallel_for(std::int64_t begin, std::int64_t end, int threads, F&& f) {
  const std::int64_t count = end - begin;
  if (count <= 0) return;
  const int workers =
      static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), count));
  if (workers <= 1) {
    for (std::int64_t i = begin; i < end; ++i) f(i);
    return;
  }
  const std::int64_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = begin + w * chunk;
    const std::int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&f, &failures, w, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        failures[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : failures) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ksd
