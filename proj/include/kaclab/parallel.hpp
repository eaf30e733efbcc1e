#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kaclab {

/// Number of worker threads used by library loops; 0 means hardware concurrency.
inline int& thread_count_setting() {
  static int n = 1;
  return n;
}

inline void set_thread_count(int n) { thread_count_setting() = n; }

inline int effective_threads() {
  int n = thread_count_setting();
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

namespace detail {
inline bool& inside_parallel_region() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/**
 * Runs body(i) for i in [0, count). Each index is computed independently and
 * written to its own slot by the caller, so results do not depend on the
 * number of threads. The first exception (lowest index) is rethrown.
 * Nested calls run serially on the calling worker.
 */
template <class Body>
void parallel_for(int count, Body&& body) {
  int nt = detail::inside_parallel_region() ? 1 : std::min(effective_threads(), count);
  if (nt <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      detail::inside_parallel_region() = true;
      // Interleaved assignment balances the cost that grows with frequency.
      for (int i = t; i < count; i += nt) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace kaclab
