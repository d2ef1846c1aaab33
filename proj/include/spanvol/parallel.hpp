#ifndef SPANVOL_PARALLEL_HPP
#define SPANVOL_PARALLEL_HPP

#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "spanvol/types.hpp"

namespace spanvol {

/// Run fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to disjoint locations; iteration order within a worker is
/// ascending, so outputs are identical to the serial loop.
inline void parallel_for(Index n, int threads, const std::function<void(Index)>& fn) {
  if (threads <= 1 || n < 2) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<Index>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (Index i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace spanvol

#endif  // SPANVOL_PARALLEL_HPP
