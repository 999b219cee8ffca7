#include "dimers/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dimers/torus_kernels.hpp"

namespace dimers {

namespace {

constexpr double kPi = std::numbers::pi;

void check_nonzero(cplx z, cplx w) {
  if (z == cplx(0) || w == cplx(0)) throw Error("characteristic polynomial needs z != 0 and w != 0");
}

Laurent2 mono(double c, int a, int b) { return Laurent2::monomial(c, a, b); }

struct Roots {
  cplx w1, w2;
};

// roots of A w² + C w + B, computed without cancellation
Roots quadratic_roots(cplx A, cplx C, cplx B) {
  cplx sq = std::sqrt(C * C - 4.0 * A * B);
  if (std::real(std::conj(C) * sq) < 0) sq = -sq;
  cplx q = -0.5 * (C + sq);
  if (q == cplx(0)) return {cplx(0), cplx(0)};
  return {q / A, B / q};
}

// a^k for integer k via polar form; stays accurate for large |k|
cplx ipow(cplx a, int k) {
  double r = std::abs(a);
  return std::polar(std::pow(r, k), k * std::arg(a));
}

// coefficient of w^n for 1/(w - a) expanded on |w| = 1
cplx pole_coeff(cplx a, int n) {
  if (std::abs(a) > 1) return n >= 0 ? -ipow(a, -n - 1) : cplx(0);
  return n <= -1 ? ipow(a, -n - 1) : cplx(0);
}

double min_log_distance(const QuadLaurent& den, double theta) {
  auto k = den.in_w(std::polar(1.0, theta));
  if (k[0] == cplx(0) || k[2] == cplx(0)) return 0;
  auto r = quadratic_roots(k[2], k[1], k[0]);
  return std::min(std::abs(std::log(std::abs(r.w1))), std::abs(std::log(std::abs(r.w2))));
}

double golden_min(const QuadLaurent& den, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = min_log_distance(den, c), fd = min_log_distance(den, d);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * (1 + std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = min_log_distance(den, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = min_log_distance(den, d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Matrix2c kf_matrix(const FlippedWeights& r, cplx z, cplx w) {
  Matrix2c K;
  K << r.r2 - r.r4 * z, r.r3 - r.r1 * w, r.r3 - r.r1 / w, -r.r2 + r.r4 / z;
  return K;
}

Matrix2c kd_matrix(const DriftedWeights& s, cplx z, cplx w) {
  Matrix2c K;
  K << s.s2 - s.s4 * z, 1.0 - w, s.s3 - s.s1 / w, -1.0 + 1.0 / z;
  return K;
}

cplx charpoly_flipped(const FlippedWeights& r, cplx z, cplx w) {
  check_nonzero(z, w);
  double S = r.r1 * r.r1 + r.r2 * r.r2 + r.r3 * r.r3 + r.r4 * r.r4;
  return r.r2 * r.r4 * (w + 1.0 / w) + r.r1 * r.r3 * (z + 1.0 / z) - S;
}

cplx charpoly_drifted(const DriftedWeights& s, cplx z, cplx w) {
  check_nonzero(z, w);
  return s.s2 * w + s.s4 / w + s.s3 * z + s.s1 / z - (s.s1 + s.s2 + s.s3 + s.s4);
}

cplx charpoly_square_octagon(double t, cplx z, cplx w) {
  check_nonzero(z, w);
  double t2 = t * t;
  return 4 + t2 * t2 - t2 / w - t2 * w - t2 / z - t2 * z;
}

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Flipped: return "flipped";
    case ModelKind::Drifted: return "drifted";
    case ModelKind::SquareOctagon: return "square-octagon";
  }
  return "?";
}

cplx CharPoly::operator()(cplx z, cplx w) const { return laurent()(z, w); }

Laurent2 CharPoly::laurent() const {
  const auto& p = weights;
  switch (kind) {
    case ModelKind::Flipped: {
      if (p.size() != 4) throw Error("flipped polynomial needs four weights");
      validate(FlippedWeights{p[0], p[1], p[2], p[3]});
      double S = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
      double a = p[1] * p[3], b = p[0] * p[2];
      return mono(a, 0, 1) + mono(a, 0, -1) + mono(b, 1, 0) + mono(b, -1, 0) + mono(-S, 0, 0);
    }
    case ModelKind::Drifted: {
      if (p.size() != 4) throw Error("drifted polynomial needs four weights");
      validate(DriftedWeights{p[0], p[1], p[2], p[3]});
      return mono(p[1], 0, 1) + mono(p[3], 0, -1) + mono(p[2], 1, 0) + mono(p[0], -1, 0) +
             mono(-(p[0] + p[1] + p[2] + p[3]), 0, 0);
    }
    case ModelKind::SquareOctagon: {
      if (p.size() != 1 || !(p[0] > 0)) throw Error("square-octagon polynomial needs one positive t");
      double t2 = p[0] * p[0];
      return mono(4 + t2 * t2, 0, 0) + mono(-t2, 0, 1) + mono(-t2, 0, -1) + mono(-t2, 1, 0) + mono(-t2, -1, 0);
    }
  }
  throw Error("unknown model");
}

Eigen::MatrixXcd FundamentalMatrix::evaluate(cplx z, cplx w) const {
  Eigen::MatrixXcd M(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) M(i, j) = (*this)(i, j).empty() ? cplx(0) : (*this)(i, j)(z, w);
  return M;
}

namespace {

Laurent2 det_rec(const FundamentalMatrix& K, std::vector<int> rows, std::vector<int> cols) {
  if (rows.size() == 1) return K(rows[0], cols[0]);
  Laurent2 acc;
  int r = rows[0];
  std::vector<int> sub_rows(rows.begin() + 1, rows.end());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (K(r, cols[c]).empty()) continue;
    std::vector<int> sub_cols = cols;
    sub_cols.erase(sub_cols.begin() + static_cast<long>(c));
    Laurent2 term = K(r, cols[c]) * det_rec(K, sub_rows, sub_cols);
    if (c % 2 == 0)
      acc += term;
    else
      acc -= term;
  }
  return acc;
}

std::vector<int> iota_except(int n, int skip) {
  std::vector<int> v;
  for (int i = 0; i < n; ++i)
    if (i != skip) v.push_back(i);
  return v;
}

}  // namespace

Laurent2 FundamentalMatrix::determinant() const {
  return det_rec(*this, iota_except(n_, -1), iota_except(n_, -1)).trimmed();
}

FundamentalMatrix FundamentalMatrix::adjugate() const {
  FundamentalMatrix A(n_);
  if (n_ == 1) {
    A(0, 0) = Laurent2(1.0);
    return A;
  }
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      Laurent2 minor = det_rec(*this, iota_except(n_, i), iota_except(n_, j));
      A(j, i) = ((i + j) % 2 == 0 ? minor : -minor).trimmed();
    }
  return A;
}

PeriodicModel::PeriodicModel(ModelKind k, std::vector<double> wts, FundamentalMatrix K)
    : kind_(k), weights_(std::move(wts)), K_(std::move(K)), det_(K_.determinant()) {}

PeriodicModel PeriodicModel::flipped(const FlippedWeights& r) {
  validate(r);
  return PeriodicModel(ModelKind::Flipped, {r.r1, r.r2, r.r3, r.r4},
                       fourier_from_pattern([&](const Edge& e) { return flipped_edge_weight(e, r); }));
}

PeriodicModel PeriodicModel::drifted(const DriftedWeights& s) {
  validate(s);
  return PeriodicModel(ModelKind::Drifted, {s.s1, s.s2, s.s3, s.s4},
                       fourier_from_pattern([&](const Edge& e) { return drifted_edge_weight(e, s); }));
}

PeriodicModel PeriodicModel::square_octagon(double t) {
  if (!(t > 0) || !std::isfinite(t)) throw Error("square-octagon weight t must be positive");
  FundamentalMatrix K(4);
  K(0, 0) = Laurent2(1.0);
  K(0, 1) = Laurent2(-1.0);
  K(0, 2) = Laurent2(t);
  K(1, 0) = Laurent2(1.0);
  K(1, 1) = Laurent2(1.0);
  K(1, 3) = Laurent2(t);
  K(2, 0) = Laurent2(t);
  K(2, 2) = mono(1, 0, 1);
  K(2, 3) = mono(1, 1, 0);
  K(3, 1) = Laurent2(t);
  K(3, 2) = mono(-1, -1, 0);
  K(3, 3) = mono(1, 0, -1);
  return PeriodicModel(ModelKind::SquareOctagon, {t}, std::move(K));
}

double PeriodicModel::edge_weight(const Edge& e) const {
  const auto& p = weights_;
  switch (kind_) {
    case ModelKind::Flipped: return flipped_edge_weight(e, {p[0], p[1], p[2], p[3]});
    case ModelKind::Drifted: return drifted_edge_weight(e, {p[0], p[1], p[2], p[3]});
    case ModelKind::SquareOctagon: break;
  }
  throw Error("square-octagon model has no square-grid edges");
}

double PeriodicModel::kasteleyn_entry(const Edge& e) const { return kasteleyn_sign(e) * edge_weight(e); }

TorusIntegrator::Orientation TorusIntegrator::orient(const QuadLaurent& den, int scan) {
  Orientation o;
  o.den = den;
  o.breaks = {-kPi, kPi};
  int N = std::max(scan, 16);
  std::vector<double> h(N);
  for (int j = 0; j < N; ++j) h[j] = min_log_distance(den, -kPi + 2 * kPi * j / N);
  const double step = 2 * kPi / N;
  for (int j = 0; j < N; ++j) {
    double hl = h[(j + N - 1) % N], hr = h[(j + 1) % N];
    if (h[j] > 1.0 || h[j] > hl || h[j] > hr) continue;
    double th = -kPi + step * j;
    double t = golden_min(den, th - step, th + step);
    if (t < -kPi) t += 2 * kPi;
    if (t > kPi) t -= 2 * kPi;
    o.breaks.push_back(t);
  }
  std::sort(o.breaks.begin(), o.breaks.end());
  return o;
}

TorusIntegrator::TorusIntegrator(const Laurent2& den, FourierOptions opt) : opt_(opt) {
  QuadLaurent q = QuadLaurent::from(den);
  inner_w_ = orient(q, opt_.scan);
  inner_z_ = orient(q.transposed(), opt_.scan);
}

QuadResult<cplx> TorusIntegrator::coefficient(const Laurent2& num, int m, int n) const {
  QuadLaurent qn = QuadLaurent::from(num);
  const Orientation* o = &inner_w_;
  int outer = m, inner = n;
  if (std::abs(m) > std::abs(n)) {
    o = &inner_z_;
    qn = qn.transposed();
    outer = n;
    inner = m;
  }
  const QuadLaurent& den = o->den;
  auto g = [&](double theta) -> cplx {
    cplx z = std::polar(1.0, theta);
    auto kd = den.in_w(z);
    auto kn = qn.in_w(z);
    cplx A = kd[2], C = kd[1], B = kd[0];
    if (std::abs(A) < 1e-300 || std::abs(B) < 1e-300) throw Error("degenerate denominator on the torus");
    auto r = quadratic_roots(A, C, B);
    cplx total = inner == 0 ? kn[2] / A : cplx(0);
    for (int k = 0; k < 2; ++k) {
      cplx a = k == 0 ? r.w1 : r.w2, other = k == 0 ? r.w2 : r.w1;
      cplx rho = (kn[2] * a * a + kn[1] * a + kn[0]) / (A * (a - other));
      total += rho * pole_coeff(a, inner);
    }
    return total * std::polar(1.0 / (2 * kPi), -outer * theta);
  };
  return integrate_adaptive<cplx>(g, o->breaks, opt_.tol, opt_.max_panels);
}

QuadResult<double> TorusIntegrator::mean_log_abs() const {
  const QuadLaurent& den = inner_w_.den;
  auto g = [&](double theta) {
    auto k = den.in_w(std::polar(1.0, theta));
    if (std::abs(k[2]) < 1e-300) throw Error("degenerate denominator on the torus");
    auto r = quadratic_roots(k[2], k[1], k[0]);
    double v = std::log(std::abs(k[2])) + std::log(std::max(1.0, std::abs(r.w1))) +
               std::log(std::max(1.0, std::abs(r.w2)));
    return v / (2 * kPi);
  };
  return integrate_adaptive<double>(g, inner_w_.breaks, opt_.tol, opt_.max_panels);
}

FreeEnergy free_energy(const Laurent2& P, double tol) {
  if (!(tol > 0)) throw Error("tolerance must be positive");
  FourierOptions opt;
  opt.tol = tol;
  TorusIntegrator integ(P, opt);
  auto r = integ.mean_log_abs();
  return {r.value, r.error};
}

FreeEnergy free_energy(const CharPoly& P, double tol) { return free_energy(P.laurent(), tol); }

double free_energy_root_of_unity(const Laurent2& P, int n, double shift) {
  TorusGrid g;
  g.n = n;
  g.shift_z = g.shift_w = shift;
  return torus_mean_log_abs(QuadLaurent::from(P), g);
}

InverseKasteleyn::InverseKasteleyn(const PeriodicModel& model, FourierOptions opt)
    : model_(model), adj_(model.matrix().adjugate()), integ_(model.determinant(), opt) {}

InverseEntry InverseKasteleyn::entry(int black_class, int white_class, int x, int y) const {
  int n = model_.matrix().size();
  if (black_class < 0 || black_class >= n || white_class < 0 || white_class >= n)
    throw Error("vertex class out of range for this fundamental domain");
  auto key = std::make_tuple(black_class, white_class, x, y);
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  InverseEntry e;
  e.black_class = black_class;
  e.white_class = white_class;
  e.x = x;
  e.y = y;
  const Laurent2& num = adj_(black_class, white_class);
  if (!num.empty()) {
    auto r = integ_.coefficient(num, x, y);
    e.value = r.value;
    e.error = r.error;
  }
  std::lock_guard<std::mutex> lk(mu_);
  cache_.emplace(key, e);
  return e;
}

double InverseKasteleyn::at(Vertex b, Vertex w) const {
  if (!model_.on_square_grid()) throw Error("real-space entries need a square-grid model");
  if (!is_black(b) || is_black(w)) throw Error("expected a black and a white vertex");
  DomainIndex db = domain_of(b), dw = domain_of(w);
  return entry(class_index(classify_vertex(b)), class_index(classify_vertex(w)), dw.x - db.x, dw.y - db.y)
      .value.real();
}

InverseEntry inv_kasteleyn(const PeriodicModel& model, int black_class, int white_class, int x, int y,
                           double tol) {
  FourierOptions opt;
  opt.tol = tol;
  InverseKasteleyn inv(model, opt);
  return inv.entry(black_class, white_class, x, y);
}

void check_vertex_disjoint(std::span<const Edge> edges) {
  std::vector<Vertex> seen;
  for (const auto& e : edges) {
    check_edge(e);
    for (Vertex v : {e.white, e.black}) {
      if (std::find(seen.begin(), seen.end(), v) != seen.end()) {
        std::ostringstream msg;
        msg << "edges share vertex (" << v.x << "," << v.y << ")";
        throw Error(msg.str());
      }
      seen.push_back(v);
    }
  }
}

double local_stats(std::span<const Edge> edges, const InverseKasteleyn& inv) {
  check_vertex_disjoint(edges);
  std::size_t m = edges.size();
  if (m == 0) return 1.0;
  Eigen::MatrixXd M(m, m);
  double prod = 1;
  for (std::size_t i = 0; i < m; ++i) {
    prod *= inv.model().kasteleyn_entry(edges[i]);
    for (std::size_t j = 0; j < m; ++j) M(i, j) = inv.at(edges[i].black, edges[j].white);
  }
  return prod * M.determinant();
}

}  // namespace dimers
