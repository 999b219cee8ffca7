#include "dimers/laurent.hpp"

#include <algorithm>
#include <cmath>

#include "dimers/lattice.hpp"

namespace dimers {

Laurent2 Laurent2::monomial(cplx c, int a, int b) {
  Laurent2 p;
  p.add(a, b, c);
  return p;
}

void Laurent2::add(int a, int b, cplx c) {
  if (c == cplx(0)) return;
  auto [it, inserted] = terms_.try_emplace({a, b}, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx(0)) terms_.erase(it);
  }
}

cplx Laurent2::coeff(int a, int b) const {
  auto it = terms_.find({a, b});
  return it == terms_.end() ? cplx(0) : it->second;
}

cplx Laurent2::operator()(cplx z, cplx w) const {
  if (z == cplx(0) || w == cplx(0)) throw Error("Laurent polynomial evaluated at z = 0 or w = 0");
  cplx s = 0;
  for (const auto& [e, c] : terms_) s += c * std::pow(z, e.first) * std::pow(w, e.second);
  return s;
}

Laurent2& Laurent2::operator+=(const Laurent2& o) {
  for (const auto& [e, c] : o.terms_) add(e.first, e.second, c);
  return *this;
}

Laurent2& Laurent2::operator-=(const Laurent2& o) {
  for (const auto& [e, c] : o.terms_) add(e.first, e.second, -c);
  return *this;
}

Laurent2 operator*(const Laurent2& a, const Laurent2& b) {
  Laurent2 p;
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) p.add(ea.first + eb.first, ea.second + eb.second, ca * cb);
  return p;
}

Laurent2 Laurent2::operator-() const {
  Laurent2 p;
  for (const auto& [e, c] : terms_) p.add(e.first, e.second, -c);
  return p;
}

Laurent2 Laurent2::trimmed(double rel) const {
  double m = 0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.second));
  Laurent2 p;
  for (const auto& [e, c] : terms_)
    if (std::abs(c) > rel * m) p.add(e.first, e.second, c);
  return p;
}

Laurent2 Laurent2::swapped() const {
  Laurent2 p;
  for (const auto& [e, c] : terms_) p.add(e.second, e.first, c);
  return p;
}

Laurent2 Laurent2::scaled(cplx cz, cplx cw) const {
  Laurent2 p;
  for (const auto& [e, c] : terms_) p.add(e.first, e.second, c * std::pow(cz, e.first) * std::pow(cw, e.second));
  return p;
}

double Laurent2::coefficient_norm() const {
  double s = 0;
  for (const auto& t : terms_) s += std::abs(t.second);
  return s;
}

QuadLaurent QuadLaurent::from(const Laurent2& p) {
  QuadLaurent q;
  for (const auto& [e, c] : p.terms()) {
    if (std::abs(e.first) > 1 || std::abs(e.second) > 1)
      throw Error("Laurent polynomial has exponents outside {-1,0,1}");
    q.at(e.first, e.second) = c;
  }
  return q;
}

cplx QuadLaurent::operator()(cplx z, cplx w) const {
  auto k = in_w(z);
  return k[0] / w + k[1] + k[2] * w;
}

QuadLaurent QuadLaurent::transposed() const {
  QuadLaurent q;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) q.at(b, a) = at(a, b);
  return q;
}

std::array<cplx, 3> QuadLaurent::in_w(cplx z) const {
  cplx zi = 1.0 / z;
  std::array<cplx, 3> k;
  for (int b = -1; b <= 1; ++b) k[b + 1] = at(-1, b) * zi + at(0, b) + at(1, b) * z;
  return k;
}

double QuadLaurent::coefficient_norm() const {
  double s = 0;
  for (auto v : c) s += std::abs(v);
  return s;
}

}  // namespace dimers
