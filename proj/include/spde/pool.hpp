#pragma once

// Replicate-indexed worker pool. Results land in caller-owned slots keyed
// by replicate id, so the reduction order never depends on scheduling.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace spde {

inline void parallel_for_index(std::size_t count, unsigned threads,
                               const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> ts;
  unsigned nt = std::min<unsigned>(threads, std::thread::hardware_concurrency() * 4 + 1);
  for (unsigned i = 0; i < nt; ++i) ts.emplace_back(worker);
  for (auto& t : ts) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

} // namespace spde
