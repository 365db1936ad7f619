#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace starshape::detail {

/// Runs body(chunk, begin, end) over [0, count) split into contiguous chunks.
/// If several chunks throw, the exception of the lowest chunk is rethrown so
/// that failures are reported identically for any thread count.
template <typename Body>
void parallel_chunks(std::ptrdiff_t count, int threads, Body&& body) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::ptrdiff_t>(count, 1))));
  if (workers == 1) {
    body(0, std::ptrdiff_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::ptrdiff_t begin = count * w / workers;
    const std::ptrdiff_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(w, begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace starshape::detail
