#ifndef STBEM_PARALLEL_HPP
#define STBEM_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stbem {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(worker_id, index) for index in [0, count) on n_threads workers,
/// pulling indices from a shared counter. Results must not depend on which
/// worker handles which index.
template <typename Fn>
void parallel_for(std::size_t count, int n_threads, Fn&& fn) {
  n_threads = resolve_threads(n_threads);
  if (count == 0) return;
  if (n_threads == 1 || count == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(0, i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= count) break;
          fn(w, i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace stbem

#endif
