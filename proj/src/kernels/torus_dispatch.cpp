#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <vector>

#include "dimers/lattice.hpp"
#include "dimers/parallel.hpp"
#include "dimers/torus_kernels.hpp"
#include "rows.hpp"

namespace dimers {

namespace {

using kernels::RowPoly;

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

RowPoly fold(const std::array<cplx, 3>& k, double rho) {
  cplx A = k[2] * rho, B = k[0] / rho, C = k[1];
  return {C.real(), C.imag(), A.real() + B.real(), B.imag() - A.imag(), A.imag() + B.imag(), A.real() - B.real()};
}

struct Circle {
  std::vector<double> c, s;
  Circle(int n, double shift) : c(n), s(n) {
    for (int k = 0; k < n; ++k) {
      double a = 2 * std::numbers::pi * (k + shift) / n;
      c[k] = std::cos(a);
      s[k] = std::sin(a);
    }
  }
};

void check_grid(const TorusGrid& g) {
  if (g.n < 1) throw Error("torus grid needs n >= 1");
}

}  // namespace

SimdLevel active_simd_level() {
  static const SimdLevel level = [] {
    const char* env = std::getenv("DIMERS_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return SimdLevel::Scalar;
    return (kernels::avx2_compiled() && cpu_has_avx2()) ? SimdLevel::Avx2 : SimdLevel::Scalar;
  }();
  return level;
}

const char* to_string(SimdLevel s) { return s == SimdLevel::Avx2 ? "avx2" : "scalar"; }

double torus_mean_log_abs(const QuadLaurent& P, const TorusGrid& g, SimdLevel level) {
  check_grid(g);
  Circle cw(g.n, g.shift_w);
  double rz = std::exp(g.log_rz), rw = std::exp(g.log_rw);
  std::vector<double> rows(g.n);
  parallel_for(g.n, [&](std::size_t j) {
    double a = 2 * std::numbers::pi * (j + g.shift_z) / g.n;
    RowPoly row = fold(P.in_w(std::polar(rz, a)), rw);
    rows[j] = level == SimdLevel::Avx2 ? kernels::row_log_abs_avx2(row, cw.c.data(), cw.s.data(), g.n)
                                       : kernels::row_log_abs_scalar(row, cw.c.data(), cw.s.data(), g.n);
  });
  return pairwise_sum(rows.data(), rows.size()) / (static_cast<double>(g.n) * g.n);
}

cplx torus_fourier_mean(const QuadLaurent& num, const QuadLaurent& den, int m, int k, const TorusGrid& g,
                        SimdLevel level) {
  check_grid(g);
  Circle cw(g.n, g.shift_w);
  std::vector<double> ck(g.n), sk(g.n);
  for (int b = 0; b < g.n; ++b) {
    double a = 2 * std::numbers::pi * k * (b + g.shift_w) / g.n;
    ck[b] = std::cos(a);
    sk[b] = std::sin(a);
  }
  double rz = std::exp(g.log_rz), rw = std::exp(g.log_rw);
  std::vector<double> re(g.n), im(g.n);
  parallel_for(g.n, [&](std::size_t j) {
    double a = 2 * std::numbers::pi * (j + g.shift_z) / g.n;
    cplx z = std::polar(rz, a);
    RowPoly N = fold(num.in_w(z), rw), P = fold(den.in_w(z), rw);
    double r, i;
    if (level == SimdLevel::Avx2)
      kernels::row_ratio_avx2(N, P, cw.c.data(), cw.s.data(), ck.data(), sk.data(), g.n, &r, &i);
    else
      kernels::row_ratio_scalar(N, P, cw.c.data(), cw.s.data(), ck.data(), sk.data(), g.n, &r, &i);
    cplx v = cplx(r, i) * std::pow(z, -m);
    re[j] = v.real();
    im[j] = v.imag();
  });
  double scale = std::pow(rw, -k) / (static_cast<double>(g.n) * g.n);
  return cplx(pairwise_sum(re.data(), re.size()), pairwise_sum(im.data(), im.size())) * scale;
}

TorusMin torus_min_abs(const QuadLaurent& P, const TorusGrid& g, SimdLevel level) {
  check_grid(g);
  Circle cw(g.n, g.shift_w);
  double rz = std::exp(g.log_rz), rw = std::exp(g.log_rw);
  std::vector<kernels::RowMin> rows(g.n);
  parallel_for(g.n, [&](std::size_t j) {
    double a = 2 * std::numbers::pi * (j + g.shift_z) / g.n;
    RowPoly row = fold(P.in_w(std::polar(rz, a)), rw);
    rows[j] = level == SimdLevel::Avx2 ? kernels::row_min_avx2(row, cw.c.data(), cw.s.data(), g.n)
                                       : kernels::row_min_scalar(row, cw.c.data(), cw.s.data(), g.n);
  });
  std::size_t bj = 0;
  for (std::size_t j = 1; j < rows.size(); ++j)
    if (rows[j].m2 < rows[bj].m2) bj = j;
  TorusMin r;
  r.value = std::sqrt(rows[bj].m2);
  r.theta = 2 * std::numbers::pi * (bj + g.shift_z) / g.n;
  r.phi = 2 * std::numbers::pi * (rows[bj].index + g.shift_w) / g.n;
  return r;
}

}  // namespace dimers
