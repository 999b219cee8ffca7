#include "dimers/equivalence.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

namespace dimers {

GaugeFactors GaugeFactors::from(const FlippedWeights& r) {
  validate(r);
  GaugeFactors g;
  g.alpha = r.r4 / r.r2;
  g.beta = r.r3 / r.r1;
  g.D1 = Eigen::Matrix2d::Zero();
  g.D2 = Eigen::Matrix2d::Zero();
  g.D1(0, 0) = 1 / (r.r1 * r.r4);
  g.D1(1, 1) = r.r3 / (r.r2 * r.r1 * r.r4);
  g.D2(0, 0) = r.r2;
  g.D2(1, 1) = r.r1 * r.r4 / r.r3;
  return g;
}

namespace {

double residual(const FlippedWeights& r, cplx z, cplx w, cplx zf, cplx wf) {
  auto g = GaugeFactors::from(r);
  Matrix2c rhs = g.D1.cast<cplx>() * kf_matrix(r, zf, wf) * g.D2.cast<cplx>();
  return (kd_matrix(to_drifted(r), z, w) - rhs).cwiseAbs().maxCoeff();
}

}  // namespace

double matrix_relation_residual(const FlippedWeights& r, cplx z, cplx w) {
  auto g = GaugeFactors::from(r);
  return residual(r, z, w, g.alpha * z, g.beta * w);
}

double matrix_relation_residual_unscaled(const FlippedWeights& r, cplx z, cplx w) { return residual(r, z, w, z, w); }

double inv_entry_ratio(int bc, int wc, int x, int y, const FlippedWeights& r) {
  if (bc < 0 || bc > 1 || wc < 0 || wc > 1) throw Error("inv_entry_ratio: classes must be 0 or 1");
  auto g = GaugeFactors::from(r);
  auto p = [](double b, int e) { return std::pow(b, e); };
  if (bc == 0 && wc == 0) return p(g.alpha, x - 1) * p(g.beta, y) / r.r1;
  if (bc == 0 && wc == 1) return p(g.alpha, x) * p(g.beta, 1 + y) / r.r4;
  if (bc == 1 && wc == 0) return p(g.alpha, x) * p(g.beta, y - 1) / r.r1;
  return p(g.alpha, x + 1) * p(g.beta, y) / r.r4;
}

std::string EquivalenceReport::describe() const {
  std::ostringstream o;
  o << std::setprecision(17) << (ok ? "equal" : "MISMATCH") << ": flipped " << p_flipped << ", drifted "
    << p_drifted << ", |difference| " << difference << " (tol " << tol << ") for edges";
  for (const auto& e : edges)
    o << " [w(" << e.white.x << "," << e.white.y << ") b(" << e.black.x << "," << e.black.y << ")]";
  return o.str();
}

EquivalenceReport compare_measures(std::span<const Edge> edges, const InverseKasteleyn& flipped,
                                   const InverseKasteleyn& drifted, double tol) {
  EquivalenceReport rep;
  rep.edges.assign(edges.begin(), edges.end());
  rep.p_flipped = local_stats(edges, flipped);
  rep.p_drifted = local_stats(edges, drifted);
  rep.difference = std::abs(rep.p_flipped - rep.p_drifted);
  rep.tol = tol;
  rep.ok = rep.difference < tol;
  return rep;
}

EquivalenceReport check_measure_equiv(std::span<const Edge> edges, const FlippedWeights& r, double tol,
                                      double quad_tol) {
  check_vertex_disjoint(edges);
  InverseKasteleyn f(PeriodicModel::flipped(r), FourierOptions{quad_tol});
  InverseKasteleyn d(PeriodicModel::drifted(to_drifted(r)), FourierOptions{quad_tol});
  auto rep = compare_measures(edges, f, d, tol);
  if (!rep.ok) throw EquivalenceFailure(rep);
  return rep;
}

std::vector<std::vector<Edge>> disjoint_edge_sets(int x0, int y0, int w, int h, int max_size) {
  std::vector<Edge> all;
  for (int x = x0; x < x0 + w; ++x)
    for (int y = y0; y < y0 + h; ++y) {
      if (x + 1 < x0 + w) all.push_back(make_edge({x, y}, {x + 1, y}));
      if (y + 1 < y0 + h) all.push_back(make_edge({x, y}, {x, y + 1}));
    }
  auto touches = [](const Edge& a, const Edge& b) {
    return a.white == b.white || a.black == b.black;
  };
  std::vector<std::vector<Edge>> out;
  std::vector<Edge> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (!cur.empty()) out.push_back(cur);
    if (static_cast<int>(cur.size()) == max_size) return;
    for (std::size_t i = start; i < all.size(); ++i) {
      bool ok = true;
      for (const auto& e : cur) ok = ok && !touches(e, all[i]);
      if (!ok) continue;
      cur.push_back(all[i]);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace dimers
