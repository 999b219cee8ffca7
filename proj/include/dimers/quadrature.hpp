#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dimers/lattice.hpp"

namespace dimers {

template <class T>
struct QuadResult {
  T value{};
  double error = 0;
  long evaluations = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(std::complex<double> v) { return std::abs(v); }

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk21(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  static const auto& xk = GK::abscissa();
  static const auto& wk = GK::weights();
  static const auto& wg = G::weights();
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T kron = wk[0] * f(c);
  T gauss{};
  // 21-point Kronrod extends the 10-point Gauss rule: odd Kronrod indices are Gauss nodes
  for (std::size_t i = 1; i < xk.size(); ++i) {
    T s = f(c - h * xk[i]) + f(c + h * xk[i]);
    kron += wk[i] * s;
    if (i % 2 == 1) gauss += wg[i / 2] * s;
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, magnitude(kron - gauss)};
}

}  // namespace detail

// Global adaptive Gauss-Kronrod (G10/K21) over [pts.front(), pts.back()], with interior breakpoints.
// Stops once the error estimate is below max(abs_tol, rel_tol·|value|).
template <class T, class F>
QuadResult<T> integrate_adaptive(F f, std::vector<double> pts, double abs_tol, int max_panels = 4000,
                                 double rel_tol = 0) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) throw Error("integration range needs two distinct endpoints");
  std::priority_queue<detail::Panel<T>> heap;
  T total{};
  double err = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto p = detail::gk21<T>(f, pts[i], pts[i + 1]);
    total += p.value;
    err += p.error;
    heap.push(p);
  }
  long evals = 21 * static_cast<long>(heap.size());
  while (err > std::max(abs_tol, rel_tol * detail::magnitude(total))) {
    if (static_cast<int>(heap.size()) >= max_panels) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not converge: error estimate " << err << " > tol " << abs_tol
          << " after " << heap.size() << " panels";
      throw Error(msg.str());
    }
    auto worst = heap.top();
    heap.pop();
    double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) {
      std::ostringstream msg;
      msg << "adaptive quadrature hit machine resolution near " << worst.a << " (error " << err << ")";
      throw Error(msg.str());
    }
    auto l = detail::gk21<T>(f, worst.a, m);
    auto r = detail::gk21<T>(f, m, worst.b);
    evals += 42;
    total += l.value + r.value - worst.value;
    err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
  }
  // re-sum to shed accumulated cancellation from the running updates
  T sum{};
  double esum = 0;
  std::vector<detail::Panel<T>> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const auto& p, const auto& q) { return p.a < q.a; });
  for (const auto& p : all) {
    sum += p.value;
    esum += p.error;
  }
  return {sum, esum, evals};
}

struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// n-point Gauss-Legendre on [-1,1]
GaussRule gauss_legendre(int n);

// composite rule on [a,b]: panels graded geometrically toward the flagged ends
GaussRule graded_rule(double a, double b, int nodes_per_panel, int levels, double ratio, bool grade_left,
                      bool grade_right, int uniform_panels = 1);

}  // namespace dimers
