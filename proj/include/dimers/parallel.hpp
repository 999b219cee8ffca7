#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dimers {

// DIMERS_WORKERS, else 1
int default_workers();
void set_default_workers(int n);

// Runs f(i) for i in [0, n) on up to `workers` threads with static interleaved assignment.
// Callers write into per-index slots, so results do not depend on the worker count.
template <class F>
void parallel_for(std::size_t n, F&& f, int workers = default_workers()) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t t = 0; t < nw; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += nw) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(m);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double pairwise_sum(const double* x, std::size_t n);

}  // namespace dimers
