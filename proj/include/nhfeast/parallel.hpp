// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nhfeast {

/// Calls fn(i) for i in [0, count) on up to `workers` threads. Tasks are
/// handed out by an atomic counter. If tasks throw, the exception of the
/// lowest failing index is rethrown after all threads join, so the reported
/// error does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (count == 0) return;
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(std::max(workers, 1u), count));
  std::vector<std::exception_ptr> errors(count);
  auto body = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  if (nthreads == 1) {
    body(next);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads - 1);
    for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back([&] { body(next); });
    body(next);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace nhfeast
