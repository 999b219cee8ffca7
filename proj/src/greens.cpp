#include "dimers/greens.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace dimers {

namespace {

constexpr double kEuler = 0.57721566490153286061;

void check_order(int n) {
  if (n != 0 && n != 1) throw Error("bessel_k: only orders 0 and 1 are supported");
}

void check_arg(double x) {
  if (!(x > 0) || !std::isfinite(x)) {
    std::ostringstream m;
    m << "bessel_k: argument must be positive and finite, got " << x;
    throw Error(m.str());
  }
}

void check_scaling(const ScalingParams& p) {
  if (!(p.norm() > 0)) throw Error("continuum Green's functions need |lambda| > 0");
}

double radius(double x, double y) {
  double r = std::hypot(x, y);
  if (r == 0) throw Error("Green's function diverges at the origin");
  return r;
}

}  // namespace

double ScalingParams::norm() const { return std::hypot(lambda1, lambda2); }

namespace detail {

double bessel_k_series(int n, double x) {
  check_order(n);
  check_arg(x);
  double q = 0.25 * x * x, lg = std::log(0.5 * x);
  double term = 1, harmonic = 0;
  if (n == 0) {
    double i0 = 1, tail = 0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (double(k) * k);
      harmonic += 1.0 / k;
      i0 += term;
      tail += term * harmonic;
      if (term * (1 + harmonic) < 1e-18 * (i0 + tail)) break;
    }
    return -(lg + kEuler) * i0 + tail;
  }
  // term_k = q^k / (k! (k+1)!), psi(k+1) + psi(k+2) = 2H_k + 1/(k+1) - 2γ
  double i1 = 0, tail = 0;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      term *= q / (double(k) * (k + 1));
      harmonic += 1.0 / k;
    }
    double psi = 2 * harmonic + 1.0 / (k + 1) - 2 * kEuler;
    i1 += term;
    tail += term * psi;
    if (k > 2 && term * (1 + std::abs(psi)) < 1e-18 * (i1 + std::abs(tail))) break;
  }
  i1 *= 0.5 * x;
  return 1 / x + lg * i1 - 0.25 * x * tail;
}

// Steed's method for the second continued fraction (Temme's normalisation).
double bessel_k_continued_fraction(int n, double x) {
  check_order(n);
  check_arg(x);
  double b = 2 * (1 + x), d = 1 / b, h = d, delh = d;
  double q1 = 0, q2 = 1, a1 = 0.25, q = a1, c = a1, a = -a1;
  double s = 1 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    double qn = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qn;
    q += c * qn;
    b += 2;
    d = 1 / (b + a * d);
    delh = (b * d - 1) * delh;
    h += delh;
    double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 1e-17) break;
  }
  h *= a1;
  double k0 = std::sqrt(std::numbers::pi / (2 * x)) * std::exp(-x) / s;
  if (n == 0) return k0;
  return k0 * (x + 0.5 - h) / x;
}

}  // namespace detail

double bessel_k(int n, double x) {
  check_order(n);
  check_arg(x);
  return x <= 2 ? detail::bessel_k_series(n, x) : detail::bessel_k_continued_fraction(n, x);
}

double massive_apply(const GridFunction& f, Vertex v, const FlippedWeights& r) {
  validate(r);
  double S = r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3 + r.r4 * r.r4;
  return r.r2 * r.r4 * (f({v.x + 2, v.y}) + f({v.x - 2, v.y})) +
         r.r1 * r.r3 * (f({v.x, v.y + 2}) + f({v.x, v.y - 2})) - S * f(v);
}

double drifted_apply(const GridFunction& f, Vertex v, const DriftedWeights& s) {
  validate(s);
  return s.s1 * f({v.x, v.y + 2}) + s.s2 * f({v.x + 2, v.y}) + s.s3 * f({v.x, v.y - 2}) +
         s.s4 * f({v.x - 2, v.y}) - (s.s1 + s.s2 + s.s3 + s.s4) * f(v);
}

Laurent2 massive_symbol(const FlippedWeights& r) {
  validate(r);
  double S = r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3 + r.r4 * r.r4;
  Laurent2 p = Laurent2::monomial(-S, 0, 0);
  p.add(1, 0, r.r2 * r.r4);
  p.add(-1, 0, r.r2 * r.r4);
  p.add(0, 1, r.r1 * r.r3);
  p.add(0, -1, r.r1 * r.r3);
  return p;
}

Laurent2 drifted_symbol(const DriftedWeights& s) {
  validate(s);
  Laurent2 p = Laurent2::monomial(-(s.s1 + s.s2 + s.s3 + s.s4), 0, 0);
  p.add(0, 1, s.s1);
  p.add(1, 0, s.s2);
  p.add(0, -1, s.s3);
  p.add(-1, 0, s.s4);
  return p;
}

double green_massive(double x, double y, const ScalingParams& p) {
  check_scaling(p);
  return bessel_k(0, p.norm() * radius(x, y)) / std::numbers::pi;
}

double green_drifted(double x, double y, const ScalingParams& p) {
  check_scaling(p);
  return std::exp(p.lambda1 * x - p.lambda2 * y) * bessel_k(0, p.norm() * radius(x, y)) / std::numbers::pi;
}

double green_anisotropic(double x, double y, const ScalingParams& p, double k1, double k2) {
  if (!(k1 > 0 && k2 > 0)) throw Error("green_anisotropic needs k1, k2 > 0");
  check_scaling(p);
  radius(x, y);
  return bessel_k(0, 0.5 * p.norm() * std::hypot(x * k1, y * k2)) / std::numbers::pi;
}

double green_anisotropic_limit(double x, double y, const ScalingParams& p, double k1, double k2) {
  if (!(k1 > 0 && k2 > 0)) throw Error("green_anisotropic_limit needs k1, k2 > 0");
  check_scaling(p);
  radius(x, y);
  return bessel_k(0, p.norm() * std::hypot(x / k1, y / k2)) / (std::numbers::pi * k1 * k2);
}

DiscreteGreen::DiscreteGreen(const Laurent2& symbol, double tol) : integ_(symbol, FourierOptions{tol}) {}

DiscreteGreen DiscreteGreen::massive(const FlippedWeights& r, double tol) {
  return DiscreteGreen(massive_symbol(r), tol);
}

DiscreteGreen DiscreteGreen::drifted(const DriftedWeights& s, double tol) {
  return DiscreteGreen(drifted_symbol(s), tol);
}

QuadResult<double> DiscreteGreen::operator()(int x, int y) const {
  // L acts on z^X w^Y by multiplication with its symbol, so H(X,Y) is the
  // coefficient of z^{-X} w^{-Y} in -1/symbol.
  auto c = integ_.coefficient(Laurent2(-1.0), -x, -y);
  return {c.value.real(), c.error, c.evaluations};
}

QuadResult<double> discrete_green_massive(int x, int y, const FlippedWeights& r, double tol) {
  return DiscreteGreen::massive(r, tol)(x, y);
}

QuadResult<double> discrete_green_drifted(int x, int y, const DriftedWeights& s, double tol) {
  return DiscreteGreen::drifted(s, tol)(x, y);
}

}  // namespace dimers
