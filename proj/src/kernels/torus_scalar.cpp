#include <cmath>

#include "rows.hpp"

namespace dimers::kernels {

double row_log_abs_scalar(const RowPoly& P, const double* c, const double* s, std::size_t n) {
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double re = P.cr + c[i] * P.p + s[i] * P.q;
    double im = P.ci + c[i] * P.u + s[i] * P.t;
    acc += 0.5 * std::log(re * re + im * im);
  }
  return acc;
}

void row_ratio_scalar(const RowPoly& N, const RowPoly& P, const double* c, const double* s, const double* ck,
                      const double* sk, std::size_t n, double* out_re, double* out_im) {
  double ar = 0, ai = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double pr = P.cr + c[i] * P.p + s[i] * P.q;
    double pi = P.ci + c[i] * P.u + s[i] * P.t;
    double nr = N.cr + c[i] * N.p + s[i] * N.q;
    double ni = N.ci + c[i] * N.u + s[i] * N.t;
    double inv = 1.0 / (pr * pr + pi * pi);
    double rr = (nr * pr + ni * pi) * inv;
    double ri = (ni * pr - nr * pi) * inv;
    ar += rr * ck[i] + ri * sk[i];
    ai += ri * ck[i] - rr * sk[i];
  }
  *out_re = ar;
  *out_im = ai;
}

RowMin row_min_scalar(const RowPoly& P, const double* c, const double* s, std::size_t n) {
  RowMin best{INFINITY, 0};
  for (std::size_t i = 0; i < n; ++i) {
    double re = P.cr + c[i] * P.p + s[i] * P.q;
    double im = P.ci + c[i] * P.u + s[i] * P.t;
    double m2 = re * re + im * im;
    if (m2 < best.m2) best = {m2, i};
  }
  return best;
}

}  // namespace dimers::kernels
