#pragma once

#include <array>
#include <complex>
#include <map>
#include <utility>

namespace dimers {

using cplx = std::complex<double>;

// Sparse Laurent polynomial in (z, w), keyed by exponent pair.
class Laurent2 {
 public:
  Laurent2() = default;
  Laurent2(cplx c) { add(0, 0, c); }  // NOLINT implicit constant
  static Laurent2 monomial(cplx c, int a, int b);

  void add(int a, int b, cplx c);
  cplx coeff(int a, int b) const;
  cplx operator()(cplx z, cplx w) const;

  Laurent2& operator+=(const Laurent2& o);
  Laurent2& operator-=(const Laurent2& o);
  friend Laurent2 operator+(Laurent2 a, const Laurent2& b) { return a += b; }
  friend Laurent2 operator-(Laurent2 a, const Laurent2& b) { return a -= b; }
  friend Laurent2 operator*(const Laurent2& a, const Laurent2& b);
  Laurent2 operator-() const;

  // drop coefficients below rel * max|c|
  Laurent2 trimmed(double rel = 1e-14) const;
  // (a,b) -> (b,a)
  Laurent2 swapped() const;
  // P(z,w) -> P(cz, dw)
  Laurent2 scaled(cplx c, cplx d) const;
  double coefficient_norm() const;
  bool empty() const { return terms_.empty(); }
  const std::map<std::pair<int, int>, cplx>& terms() const { return terms_; }

 private:
  std::map<std::pair<int, int>, cplx> terms_;
};

// Dense form with both exponents in {-1,0,1}: c[(a+1)*3 + (b+1)] multiplies z^a w^b.
struct QuadLaurent {
  std::array<cplx, 9> c{};

  static QuadLaurent from(const Laurent2& p);  // throws if out of range
  cplx at(int a, int b) const { return c[(a + 1) * 3 + (b + 1)]; }
  cplx& at(int a, int b) { return c[(a + 1) * 3 + (b + 1)]; }
  cplx operator()(cplx z, cplx w) const;
  QuadLaurent transposed() const;
  // coefficients of w^{-1}, w^0, w^1 at fixed z
  std::array<cplx, 3> in_w(cplx z) const;
  double coefficient_norm() const;
};

}  // namespace dimers
