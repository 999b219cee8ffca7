#pragma once

// Row kernels over one circle of the torus grid. A row is P(w) = A w + B/w + C at fixed z,
// pre-folded into re = cr + c·p + s·q, im = ci + c·u + s·t with (c,s) = (cos φ, sin φ).

#include <cstddef>

namespace dimers::kernels {

struct RowPoly {
  double cr, ci, p, q, u, t;
};

struct RowMin {
  double m2;
  std::size_t index;
};

double row_log_abs_scalar(const RowPoly& P, const double* c, const double* s, std::size_t n);
void row_ratio_scalar(const RowPoly& N, const RowPoly& P, const double* c, const double* s, const double* ck,
                      const double* sk, std::size_t n, double* out_re, double* out_im);
RowMin row_min_scalar(const RowPoly& P, const double* c, const double* s, std::size_t n);

bool avx2_compiled();
double row_log_abs_avx2(const RowPoly& P, const double* c, const double* s, std::size_t n);
void row_ratio_avx2(const RowPoly& N, const RowPoly& P, const double* c, const double* s, const double* ck,
                    const double* sk, std::size_t n, double* out_re, double* out_im);
RowMin row_min_avx2(const RowPoly& P, const double* c, const double* s, std::size_t n);

}  // namespace dimers::kernels
