#ifndef CMESYNTH_PARALLEL_HPP
#define CMESYNTH_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cmesynth {

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
///
/// Indices are split into contiguous chunks, one per worker. fn must only write
/// to slots owned by its index; the first exception (lowest chunk) is rethrown
/// after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const std::size_t n_workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n_workers);
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  const std::size_t chunk = (count + n_workers - 1) / n_workers;
  for (std::size_t w = 0; w < n_workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    threads.emplace_back([&, w, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace cmesynth

#endif  // CMESYNTH_PARALLEL_HPP
