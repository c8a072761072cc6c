#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <future>
#include <vector>

#include "skt/errors.hpp"

namespace skt {

// Runs fn(0..n-1) across up to `jobs` worker threads. Results must be
// written into per-index slots by the caller; exceptions are rethrown in
// index order, so the observable behaviour is identical to a serial run.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs < 1) throw ValidationError("parallel_for: jobs must be >= 1");
  if (n == 0) return;
  if (jobs == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::vector<std::future<void>> futures;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  for (std::size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    }));
  }
  for (auto& f : futures) f.get();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace skt
