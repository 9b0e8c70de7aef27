#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace fluentnet {

/// Worker count from FLUENTNET_WORKERS (default 1).
inline std::size_t worker_count() {
  static const std::size_t workers = [] {
    const char* env = std::getenv("FLUENTNET_WORKERS");
    if (env == nullptr) return std::size_t{1};
    try {
      const long v = std::stol(env);
      return v > 0 ? static_cast<std::size_t>(v) : std::size_t{1};
    } catch (...) {
      return std::size_t{1};
    }
  }();
  return workers;
}

/// Runs fn(i) for i in [0, n). Each index is handled by exactly one worker;
/// callers that reduce across indices must do so afterwards in index order.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fluentnet
