#include <cmath>
#include <cstdint>

#include "rows.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#define DIMERS_HAVE_AVX2 1
#include <immintrin.h>
#else
#define DIMERS_HAVE_AVX2 0
#endif

namespace dimers::kernels {

#if DIMERS_HAVE_AVX2

bool avx2_compiled() { return true; }

namespace {

struct Lanes {
  __m256d cr, ci, p, q, u, t;
  explicit Lanes(const RowPoly& P)
      : cr(_mm256_set1_pd(P.cr)),
        ci(_mm256_set1_pd(P.ci)),
        p(_mm256_set1_pd(P.p)),
        q(_mm256_set1_pd(P.q)),
        u(_mm256_set1_pd(P.u)),
        t(_mm256_set1_pd(P.t)) {}
  void eval(__m256d c, __m256d s, __m256d& re, __m256d& im) const {
    re = _mm256_fmadd_pd(s, q, _mm256_fmadd_pd(c, p, cr));
    im = _mm256_fmadd_pd(s, t, _mm256_fmadd_pd(c, u, ci));
  }
};

double hsum(__m256d v) {
  alignas(32) double a[4];
  _mm256_store_pd(a, v);
  return (a[0] + a[1]) + (a[2] + a[3]);
}

}  // namespace

double row_log_abs_avx2(const RowPoly& P, const double* c, const double* s, std::size_t n) {
  Lanes L(P);
  const __m256i mant = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  const __m256i bias = _mm256_set1_epi64x(1023);
  __m256d prod = _mm256_set1_pd(1.0);
  __m256i expo = _mm256_setzero_si256();
  __m256d zero = _mm256_setzero_pd();
  __m256d hit_zero = zero;
  std::size_t i = 0;
  // keep each lane's running product in [1,2) and carry the binary exponent separately
  for (; i + 4 <= n; i += 4) {
    __m256d re, im;
    L.eval(_mm256_loadu_pd(c + i), _mm256_loadu_pd(s + i), re, im);
    __m256d m2 = _mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im));
    hit_zero = _mm256_or_pd(hit_zero, _mm256_cmp_pd(m2, zero, _CMP_EQ_OQ));
    prod = _mm256_mul_pd(prod, m2);
    __m256i bits = _mm256_castpd_si256(prod);
    expo = _mm256_add_epi64(expo, _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), bias));
    prod = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant), one_bits));
  }
  if (_mm256_movemask_pd(hit_zero)) return -INFINITY;
  alignas(32) double pl[4];
  alignas(32) std::int64_t el[4];
  _mm256_store_pd(pl, prod);
  _mm256_store_si256(reinterpret_cast<__m256i*>(el), expo);
  double acc = 0;
  for (int k = 0; k < 4; ++k) acc += 0.5 * (std::log(pl[k]) + static_cast<double>(el[k]) * M_LN2);
  for (; i < n; ++i) {
    double re = P.cr + c[i] * P.p + s[i] * P.q;
    double im = P.ci + c[i] * P.u + s[i] * P.t;
    acc += 0.5 * std::log(re * re + im * im);
  }
  return acc;
}

void row_ratio_avx2(const RowPoly& N, const RowPoly& P, const double* c, const double* s, const double* ck,
                    const double* sk, std::size_t n, double* out_re, double* out_im) {
  Lanes LP(P), LN(N);
  __m256d ar = _mm256_setzero_pd(), ai = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d cc = _mm256_loadu_pd(c + i), ss = _mm256_loadu_pd(s + i);
    __m256d pr, pi, nr, ni;
    LP.eval(cc, ss, pr, pi);
    LN.eval(cc, ss, nr, ni);
    __m256d inv = _mm256_div_pd(one, _mm256_fmadd_pd(pr, pr, _mm256_mul_pd(pi, pi)));
    __m256d rr = _mm256_mul_pd(_mm256_fmadd_pd(nr, pr, _mm256_mul_pd(ni, pi)), inv);
    __m256d ri = _mm256_mul_pd(_mm256_fmsub_pd(ni, pr, _mm256_mul_pd(nr, pi)), inv);
    __m256d k1 = _mm256_loadu_pd(ck + i), k2 = _mm256_loadu_pd(sk + i);
    ar = _mm256_add_pd(ar, _mm256_fmadd_pd(rr, k1, _mm256_mul_pd(ri, k2)));
    ai = _mm256_add_pd(ai, _mm256_fmsub_pd(ri, k1, _mm256_mul_pd(rr, k2)));
  }
  double sr = hsum(ar), si = hsum(ai);
  for (; i < n; ++i) {
    double pr = P.cr + c[i] * P.p + s[i] * P.q;
    double pi = P.ci + c[i] * P.u + s[i] * P.t;
    double nr = N.cr + c[i] * N.p + s[i] * N.q;
    double ni = N.ci + c[i] * N.u + s[i] * N.t;
    double inv = 1.0 / (pr * pr + pi * pi);
    double rr = (nr * pr + ni * pi) * inv;
    double ri = (ni * pr - nr * pi) * inv;
    sr += rr * ck[i] + ri * sk[i];
    si += ri * ck[i] - rr * sk[i];
  }
  *out_re = sr;
  *out_im = si;
}

RowMin row_min_avx2(const RowPoly& P, const double* c, const double* s, std::size_t n) {
  Lanes L(P);
  __m256d best = _mm256_set1_pd(INFINITY);
  __m256d best_idx = _mm256_setzero_pd();
  __m256d idx = _mm256_setr_pd(0, 1, 2, 3);
  const __m256d four = _mm256_set1_pd(4);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d re, im;
    L.eval(_mm256_loadu_pd(c + i), _mm256_loadu_pd(s + i), re, im);
    __m256d m2 = _mm256_fmadd_pd(re, re, _mm256_mul_pd(im, im));
    __m256d lt = _mm256_cmp_pd(m2, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, m2, lt);
    best_idx = _mm256_blendv_pd(best_idx, idx, lt);
    idx = _mm256_add_pd(idx, four);
  }
  alignas(32) double b[4], bi[4];
  _mm256_store_pd(b, best);
  _mm256_store_pd(bi, best_idx);
  RowMin r{INFINITY, 0};
  // ties resolve to the lowest index, matching the scalar scan
  for (int k = 0; k < 4; ++k) {
    auto j = static_cast<std::size_t>(bi[k]);
    if (b[k] < r.m2 || (b[k] == r.m2 && j < r.index)) r = {b[k], j};
  }
  for (; i < n; ++i) {
    double re = P.cr + c[i] * P.p + s[i] * P.q;
    double im = P.ci + c[i] * P.u + s[i] * P.t;
    double m2 = re * re + im * im;
    if (m2 < r.m2) r = {m2, i};
  }
  return r;
}

#else

bool avx2_compiled() { return false; }

double row_log_abs_avx2(const RowPoly& P, const double* c, const double* s, std::size_t n) {
  return row_log_abs_scalar(P, c, s, n);
}

void row_ratio_avx2(const RowPoly& N, const RowPoly& P, const double* c, const double* s, const double* ck,
                    const double* sk, std::size_t n, double* out_re, double* out_im) {
  row_ratio_scalar(N, P, c, s, ck, sk, n, out_re, out_im);
}

RowMin row_min_avx2(const RowPoly& P, const double* c, const double* s, std::size_t n) {
  return row_min_scalar(P, c, s, n);
}

#endif

}  // namespace dimers::kernels
