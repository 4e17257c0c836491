#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#include "crom/types.hpp"

namespace crom {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(begin, end) over contiguous chunks of [0, n). Chunks are fixed by
// the thread count, so per-chunk outputs indexed by chunk keep a stable order.
// The first exception thrown by a worker is rethrown on the caller.
template <typename Fn>
void parallel_for_chunks(Index n, int threads, Fn&& fn) {
  if (n <= 0) return;
  threads = resolve_threads(threads);
  const Index workers = std::min<Index>(threads, n);
  if (workers <= 1) {
    fn(Index{0}, n);
    return;
  }
  const Index chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (Index t = 0; t < workers; ++t) {
    const Index begin = t * chunk;
    const Index end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, &errors, t, begin, end]() {
      try {
        fn(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace crom
