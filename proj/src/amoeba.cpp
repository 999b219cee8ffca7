#include "dimers/amoeba.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "dimers/parallel.hpp"
#include "dimers/torus_kernels.hpp"

namespace dimers {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double default_tol(const Laurent2& P, const AmoebaPoint& p) {
  double s = 0;
  for (const auto& [e, c] : P.terms()) s += std::abs(c) * std::exp(e.first * p.u + e.second * p.v);
  return 16 * std::numeric_limits<double>::epsilon() * s;
}

struct Eval {
  cplx f, dth, dph;
};

Eval eval(const Laurent2& P, const AmoebaPoint& p, double th, double ph) {
  Eval r{0, 0, 0};
  for (const auto& [e, c] : P.terms()) {
    cplx m = c * std::exp(cplx(e.first * p.u + e.second * p.v, e.first * th + e.second * ph));
    r.f += m;
    r.dth += cplx(0, e.first) * m;
    r.dph += cplx(0, e.second) * m;
  }
  return r;
}

// Levenberg-Marquardt on (Re P, Im P) over the angles
std::pair<double, std::pair<double, double>> polish(const Laurent2& P, const AmoebaPoint& p, double th, double ph) {
  double mu = 1e-3;
  Eval e = eval(P, p, th, ph);
  double best = std::abs(e.f);
  for (int it = 0; it < 100 && best > 0; ++it) {
    double j11 = e.dth.real(), j12 = e.dph.real(), j21 = e.dth.imag(), j22 = e.dph.imag();
    double r1 = e.f.real(), r2 = e.f.imag();
    double a = j11 * j11 + j21 * j21, b = j11 * j12 + j21 * j22, d = j12 * j12 + j22 * j22;
    double g1 = j11 * r1 + j21 * r2, g2 = j12 * r1 + j22 * r2;
    bool improved = false;
    for (int k = 0; k < 30; ++k) {
      double A = a + mu * (a + d + 1e-300), D = d + mu * (a + d + 1e-300);
      double det = A * D - b * b;
      if (!(det > 0)) {
        mu *= 10;
        continue;
      }
      double s1 = -(D * g1 - b * g2) / det, s2 = -(A * g2 - b * g1) / det;
      Eval t = eval(P, p, th + s1, ph + s2);
      if (std::abs(t.f) < best) {
        th += s1;
        ph += s2;
        e = t;
        best = std::abs(t.f);
        mu = std::max(mu * 0.3, 1e-12);
        improved = true;
        break;
      }
      mu *= 10;
    }
    if (!improved) break;
  }
  return {best, {th, ph}};
}

std::string point_str(const AmoebaPoint& p) {
  std::ostringstream o;
  o.precision(17);
  o << "(" << p.u << ", " << p.v << ")";
  return o.str();
}

}  // namespace

Membership amoeba_membership(const AmoebaPoint& p, const Laurent2& P, const AmoebaOptions& opt) {
  if (P.empty()) throw Error("amoeba of the zero polynomial");
  if (opt.grid < 4) throw Error("amoeba grid must be at least 4");
  auto Q = QuadLaurent::from(P);
  Membership m;
  m.tol = opt.tol > 0 ? opt.tol : default_tol(P, p);
  m.min_abs = std::numeric_limits<double>::infinity();
  // two scans: one through the real axes, one offset by half a cell
  for (double shift : {0.0, 0.5}) {
    TorusGrid g{opt.grid, shift, shift, p.u, p.v};
    auto s = torus_min_abs(Q, g);
    auto [val, ang] = polish(P, p, s.theta, s.phi);
    if (val < m.min_abs) {
      m.min_abs = val;
      m.theta = std::remainder(ang.first, kTwoPi);
      m.phi = std::remainder(ang.second, kTwoPi);
    }
    if (m.min_abs < m.tol) break;
  }
  m.inside = m.min_abs < m.tol;
  m.ambiguous = !m.inside && m.min_abs < opt.band * m.tol;
  return m;
}

bool amoeba_contains(double u, double v, const CharPoly& P, double tol) {
  AmoebaOptions opt;
  opt.tol = tol;
  return amoeba_membership({u, v}, P.laurent(), opt).inside;
}

namespace {

double checked_log(double num, double den) {
  if (!(den > 0) || !(num / den > 0)) {
    std::ostringstream m;
    m << "intercept: log argument " << num << "/" << den << " is not positive";
    throw Error(m.str());
  }
  return std::log(num / den);
}

double u_intercept(double l1, double l2, double e) {
  double L2 = l1 * l1 + l2 * l2;
  double den = 2 - 2 * e * l2;
  double num = 2 - 2 * e * l2 + e * e * L2 - std::sqrt(e * e * L2 * (e * e * l1 * l1 + (2 - e * l2) * (2 - e * l2)));
  return -checked_log(num, den);
}

double v_intercept(double l1, double l2, double e, double sign) {
  double L2 = l1 * l1 + l2 * l2;
  double a = 2 + sign * 2 * e * l1, b = 2 + sign * e * l1;
  double num = a + e * e * L2 - std::sqrt(e * e * L2 * (e * e * l2 * l2 + b * b));
  return -checked_log(num, a);
}

void check_eps(double e) {
  if (!(e > 0)) throw Error("intercepts need eps > 0");
}

}  // namespace

Intercepts intercepts(double l1, double l2, double e) {
  check_eps(e);
  return {u_intercept(l1, l2, e), v_intercept(l1, l2, e, -1)};
}

Intercepts intercepts_as_printed(double l1, double l2, double e) {
  check_eps(e);
  return {u_intercept(l1, l2, e), v_intercept(l1, l2, e, +1)};
}

double bisect_boundary(const Laurent2& P, AmoebaPoint from, AmoebaPoint to, double tol, const AmoebaOptions& opt) {
  bool a_in = amoeba_membership(from, P, opt).inside, b_in = amoeba_membership(to, P, opt).inside;
  if (a_in == b_in) throw Error("bisect_boundary: endpoints " + point_str(from) + " and " + point_str(to) +
                                " do not bracket the boundary");
  double lo = 0, hi = 1;
  double len = std::hypot(to.u - from.u, to.v - from.v);
  while ((hi - lo) * len > tol) {
    double mid = 0.5 * (lo + hi);
    AmoebaPoint q{from.u + mid * (to.u - from.u), from.v + mid * (to.v - from.v)};
    bool in = amoeba_membership(q, P, opt).inside;
    (in == a_in ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * len;
}

std::vector<AmoebaPoint> hole_boundary(const Laurent2& P, AmoebaPoint c, int rays, double r_max, double tol,
                                       const AmoebaOptions& opt) {
  if (rays < 3) throw Error("hole_boundary needs at least 3 rays");
  if (amoeba_membership(c, P, opt).inside) throw Error("hole_boundary: centre " + point_str(c) + " is in the amoeba");
  std::vector<AmoebaPoint> out(rays);
  parallel_for(rays, [&](std::size_t k) {
    double a = kTwoPi * k / rays, du = std::cos(a), dv = std::sin(a);
    int steps = 64;
    double r_in = -1;
    for (int s = 1; s <= steps; ++s) {
      double r = r_max * s / steps;
      if (amoeba_membership({c.u + r * du, c.v + r * dv}, P, opt).inside) {
        r_in = r;
        break;
      }
    }
    if (r_in < 0) throw Error("hole_boundary: ray leaves the search radius without meeting the amoeba");
    double r_out = r_in - r_max / steps;
    double r = r_out + bisect_boundary(P, {c.u + r_out * du, c.v + r_out * dv}, {c.u + r_in * du, c.v + r_in * dv}, tol, opt);
    out[k] = {c.u + r * du, c.v + r * dv};
  });
  return out;
}

double hausdorff_to_circle(const std::vector<AmoebaPoint>& pts, AmoebaPoint c, double radius) {
  if (pts.empty()) throw Error("hausdorff_to_circle: no points");
  double d1 = 0;
  for (const auto& p : pts) d1 = std::max(d1, std::abs(std::hypot(p.u - c.u, p.v - c.v) - radius));
  // circle to curve: distance to the closed polyline through the samples
  auto seg = [](double px, double py, const AmoebaPoint& a, const AmoebaPoint& b) {
    double dx = b.u - a.u, dy = b.v - a.v, l2 = dx * dx + dy * dy;
    double t = l2 > 0 ? std::clamp(((px - a.u) * dx + (py - a.v) * dy) / l2, 0.0, 1.0) : 0.0;
    return std::hypot(px - a.u - t * dx, py - a.v - t * dy);
  };
  double d2 = 0;
  int n = 4096;
  for (int k = 0; k < n; ++k) {
    double a = kTwoPi * k / n;
    double qu = c.u + radius * std::cos(a), qv = c.v + radius * std::sin(a), best = 1e300;
    for (std::size_t i = 0; i < pts.size(); ++i) best = std::min(best, seg(qu, qv, pts[i], pts[(i + 1) % pts.size()]));
    d2 = std::max(d2, best);
  }
  return std::max(d1, d2);
}

EllipseFit fit_ellipse(const std::vector<AmoebaPoint>& pts) {
  if (pts.size() < 5) throw Error("fit_ellipse needs at least 5 points");
  // centre and scale first so the design matrix is well conditioned
  double cu = 0, cv = 0;
  for (const auto& p : pts) cu += p.u, cv += p.v;
  cu /= pts.size();
  cv /= pts.size();
  double sc = 0;
  for (const auto& p : pts) sc = std::max(sc, std::hypot(p.u - cu, p.v - cv));
  if (!(sc > 0)) throw Error("fit_ellipse: points coincide");
  Eigen::MatrixXd M(pts.size(), 6);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double x = (pts[i].u - cu) / sc, y = (pts[i].v - cv) / sc;
    M.row(i) << x * x, x * y, y * y, x, y, 1;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  Eigen::VectorXd q = svd.matrixV().col(5);
  double A = q[0], B = q[1], C = q[2], D = q[3], E = q[4], F = q[5];
  double disc = B * B - 4 * A * C;
  if (!(disc < 0)) throw Error("fit_ellipse: samples do not lie on an ellipse");
  double x0 = (2 * C * D - B * E) / disc, y0 = (2 * A * E - B * D) / disc;
  double F0 = A * x0 * x0 + B * x0 * y0 + C * y0 * y0 + D * x0 + E * y0 + F;
  Eigen::Matrix2d Q;
  Q << A, B / 2, B / 2, C;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Q);
  double l0 = es.eigenvalues()[0], l1 = es.eigenvalues()[1];
  if (!(-F0 / l0 > 0) || !(-F0 / l1 > 0)) throw Error("fit_ellipse: degenerate conic");
  // smaller eigenvalue goes with the major axis
  EllipseFit r;
  r.semi_major = std::sqrt(-F0 / l0) * sc;
  r.semi_minor = std::sqrt(-F0 / l1) * sc;
  Eigen::Vector2d ax = es.eigenvectors().col(0);
  r.angle = std::atan2(ax[1], ax[0]);
  r.center = {cu + x0 * sc, cv + y0 * sc};
  double f = std::sqrt(std::max(0.0, r.semi_major * r.semi_major - r.semi_minor * r.semi_minor));
  r.focus1 = {r.center.u + f * ax[0], r.center.v + f * ax[1]};
  r.focus2 = {r.center.u - f * ax[0], r.center.v - f * ax[1]};
  for (const auto& p : pts) {
    double x = p.u - r.center.u, y = p.v - r.center.v;
    double a = x * ax[0] + y * ax[1], b = -x * ax[1] + y * ax[0];
    double g = std::hypot(a / r.semi_major, b / r.semi_minor);
    r.max_residual = std::max(r.max_residual, std::abs(g - 1) * r.semi_minor);
  }
  return r;
}

const char* to_string(PhaseLabel p) {
  switch (p) {
    case PhaseLabel::Frozen: return "frozen";
    case PhaseLabel::Liquid: return "liquid";
    case PhaseLabel::Gaseous: return "gaseous";
  }
  return "?";
}

std::vector<std::pair<double, double>> recession_directions(const Laurent2& P) {
  std::vector<std::pair<int, int>> pts;
  for (const auto& [e, c] : P.terms())
    if (std::abs(c) > 0) pts.push_back(e);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw Error("recession_directions: Newton polygon is degenerate");
  // Andrew's monotone chain, counter-clockwise, collinear points dropped
  auto cross = [](std::pair<int, int> o, std::pair<int, int> a, std::pair<int, int> b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<int, int>> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  if (h.size() < 3) throw Error("recession_directions: Newton polygon is degenerate");
  std::vector<std::pair<double, double>> dirs;
  for (std::size_t i = 0; i < h.size(); ++i) {
    auto prev = h[(i + h.size() - 1) % h.size()], cur = h[i], next = h[(i + 1) % h.size()];
    // outward normals of the two edges at this vertex
    auto normal = [](std::pair<int, int> a, std::pair<int, int> b) {
      double ex = b.first - a.first, ey = b.second - a.second, n = std::hypot(ex, ey);
      return std::pair{ey / n, -ex / n};
    };
    auto n1 = normal(prev, cur), n2 = normal(cur, next);
    double x = n1.first + n2.first, y = n1.second + n2.second, n = std::hypot(x, y);
    dirs.push_back({x / n, y / n});
  }
  return dirs;
}

namespace {

// distance along d beyond which one monomial dominates the rest for good
double dominance_radius(const Laurent2& P, AmoebaPoint p, std::pair<double, double> d) {
  double top = -1e300;
  for (const auto& [e, c] : P.terms()) top = std::max(top, e.first * d.first + e.second * d.second);
  double lead = 0, gap = 1e300;
  for (const auto& [e, c] : P.terms()) {
    double s = e.first * d.first + e.second * d.second;
    if (s > top - 1e-12)
      lead += std::abs(c) * std::exp(e.first * p.u + e.second * p.v);
    else
      gap = std::min(gap, top - s);
  }
  double rest = 0;
  for (const auto& [e, c] : P.terms()) {
    double s = e.first * d.first + e.second * d.second;
    if (s <= top - 1e-12) rest += std::abs(c) * std::exp(e.first * p.u + e.second * p.v);
  }
  if (rest == 0) return 0;
  // lead·e^{top t} > 2·rest·e^{(top-gap) t}
  return std::max(0.0, std::log(2 * rest / lead) / gap);
}

bool ray_escapes(const Laurent2& P, AmoebaPoint p, std::pair<double, double> d, const AmoebaOptions& opt) {
  double T = dominance_radius(P, p, d) + 1;
  int steps = std::max(200, static_cast<int>(T / 0.01));
  for (int s = 1; s <= steps; ++s) {
    double t = T * s / steps;
    if (amoeba_membership({p.u + t * d.first, p.v + t * d.second}, P, opt).inside) return false;
  }
  return true;
}

}  // namespace

PhaseLabel classify_phase(const Laurent2& P, AmoebaPoint p, const AmoebaOptions& opt) {
  auto m = amoeba_membership(p, P, opt);
  if (m.ambiguous)
    throw BoundaryAmbiguous("classify_phase: " + point_str(p) + " is within tolerance of the amoeba boundary");
  if (m.inside) {
    // interior test on a small ring
    double rho = 1e-6 * std::max(1.0, std::hypot(p.u, p.v));
    for (int k = 0; k < 16; ++k) {
      double a = kTwoPi * k / 16;
      if (!amoeba_membership({p.u + rho * std::cos(a), p.v + rho * std::sin(a)}, P, opt).inside)
        throw BoundaryAmbiguous("classify_phase: " + point_str(p) + " lies on the amoeba boundary");
    }
    return PhaseLabel::Liquid;
  }
  // complement components are convex, so an unbounded one contains a ray in its vertex's normal cone
  for (auto d : recession_directions(P))
    if (ray_escapes(P, p, d, opt)) return PhaseLabel::Frozen;
  return PhaseLabel::Gaseous;
}

PhaseLabel classify_phase(const CharPoly& P, AmoebaPoint p, const AmoebaOptions& opt) {
  return classify_phase(P.laurent(), p, opt);
}

}  // namespace dimers
