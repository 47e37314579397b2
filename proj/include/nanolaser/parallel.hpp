#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nanolaser {

/// Lane count from NANOLASER_LANES, else the hardware concurrency.
std::size_t default_lanes();

/// Evaluates fn(i) for i in [0, n) on up to `lanes` threads and returns the
/// results indexed by i. Work assignment is dynamic, but each result depends
/// only on its index, so the output is independent of the lane count. The
/// first exception (lowest index) is rethrown after all lanes finish.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t n, std::size_t lanes, Fn&& fn) {
  std::vector<Result> out(n);
  std::vector<std::exception_ptr> errors(n);
  if (lanes == 0) lanes = default_lanes();
  lanes = std::max<std::size_t>(1, std::min(lanes, n));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (lanes == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(lanes);
    for (std::size_t l = 0; l < lanes; ++l) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace nanolaser
