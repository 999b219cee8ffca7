#include "dimers/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dimers {

namespace {

int workers_from_env() {
  const char* v = std::getenv("DIMERS_WORKERS");
  if (!v) return 1;
  try {
    int n = std::stoi(v);
    return n > 0 ? n : 1;
  } catch (...) {
    return 1;
  }
}

std::atomic<int>& worker_slot() {
  static std::atomic<int> n{workers_from_env()};
  return n;
}

}  // namespace

int default_workers() { return worker_slot().load(); }

void set_default_workers(int n) { worker_slot().store(n > 0 ? n : 1); }

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace dimers
