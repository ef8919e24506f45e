#pragma once

#include "hiernet/types.hpp"

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hiernet {

/// Independent 64-bit seed for task `index` of a run seeded with `master`
/// (splitmix64 of the pair).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Worker cap for parallel sections (default 1). Values < 1 are treated as 1.
void set_max_threads(Index n);
Index max_threads();

/// Calls body(i) for every i in [0, count), spread over at most
/// max_threads() threads. Each index is visited exactly once, so results
/// written to per-index slots do not depend on the thread count. The first
/// exception thrown by any body is rethrown after all workers finish.
template <class Body>
void parallel_for(Index count, Body&& body) {
  const Index workers = std::min<Index>(max_threads(), count);
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&]() {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  for (Index w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hiernet
