#include "dimers/correlations.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "dimers/parallel.hpp"

namespace dimers {

namespace {

constexpr double kPi = std::numbers::pi;

void check_lambda(const ScalingParams& p) {
  if (!(p.norm() > 0)) throw Error("correlation functions need |lambda| > 0");
}

void check_distinct(std::span<const double, 4> x) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (x[i] == x[j]) throw Error("correlation positions must be distinct");
}

// entry K^{-1}(w at x_a, b at x_b)/ε for the height-change events on a common line
double line_entry(int white_class, int black_index, double xa, double xb, const ScalingParams& l) {
  return scaled_inv_entry(1 - black_index, white_class, xb - xa, 0, l);
}

double gap_value(Gap g, double y1, double y2, double y3) {
  switch (g) {
    case Gap::Y1: return y1;
    case Gap::Y2: return y2;
    case Gap::Y3: return y3;
    case Gap::Y12: return y1 + y2;
    case Gap::Y23: return y2 + y3;
    case Gap::Y123: return y1 + y2 + y3;
  }
  return 0;
}

void check_gaps(double y1, double y2, double y3) {
  if (!(y1 > 0 && y2 > 0 && y3 > 0)) throw Error("f_connected needs positive gaps");
}

}  // namespace

double scaled_inv_entry(int bc, int wc, double x, double y, const ScalingParams& l) {
  if (bc < 0 || bc > 1 || wc < 0 || wc > 1) throw Error("scaled_inv_entry: classes must be 0 or 1");
  check_lambda(l);
  double r = std::hypot(x, y);
  if (r == 0) throw Error("scaled_inv_entry diverges at the origin");
  double L = l.norm(), k0 = bessel_k(0, L * r), k1 = bessel_k(1, L * r);
  double a = L / (kPi * r) * k1;
  if (bc == 0 && wc == 0) return a * x + l.lambda1 * k0 / kPi;
  if (bc == 0 && wc == 1) return -a * y + l.lambda2 * k0 / kPi;
  if (bc == 1 && wc == 0) return a * y + l.lambda2 * k0 / kPi;
  return a * x - l.lambda1 * k0 / kPi;
}

double s2_integrand(double v1, double v2, const ScalingParams& l) {
  check_lambda(l);
  if (v1 == v2) throw Error("s2_integrand: coincident points");
  double L = l.norm(), d = L * std::abs(v1 - v2);
  double k0 = bessel_k(0, d), k1 = bessel_k(1, d);
  return 18 / (kPi * kPi) * L * L * (k0 * k0 + k1 * k1);
}

void check_disjoint(std::span<const Interval> iv, bool allow_touching) {
  for (const auto& g : iv)
    if (!(g.b > g.a)) {
      std::ostringstream m;
      m << "interval (" << g.a << ", " << g.b << ") must have positive length";
      throw Error(m.str());
    }
  for (std::size_t i = 0; i < iv.size(); ++i)
    for (std::size_t j = i + 1; j < iv.size(); ++j) {
      double lo = std::max(iv[i].a, iv[j].a), hi = std::min(iv[i].b, iv[j].b);
      if (lo < hi || (!allow_touching && lo == hi)) {
        std::ostringstream m;
        m << "intervals " << i << " and " << j << " " << (lo < hi ? "overlap" : "touch");
        if (lo == hi) m << "; the integral diverges for touching intervals";
        throw Error(m.str());
      }
    }
}

QuadResult<double> s2(const Interval& gi, const Interval& gj, const ScalingParams& l, double tol) {
  check_lambda(l);
  std::array<Interval, 2> iv{gi, gj};
  check_disjoint(iv, false);
  long evals = 0;
  double inner_err = 0;
  double scale = std::max(1.0, gi.length() * gj.length());
  auto outer = [&](double v1) {
    auto in = integrate_adaptive<double>([&](double v2) { return s2_integrand(v1, v2, l); }, {gj.a, gj.b},
                                         0.1 * tol / scale, 4000, 1e-14);
    evals += in.evaluations;
    inner_err = std::max(inner_err, in.error);
    return in.value;
  };
  auto r = integrate_adaptive<double>(outer, {gi.a, gi.b}, 0.5 * tol, 4000, 1e-13);
  r.error += inner_err * gi.length();
  r.evaluations = evals;
  return r;
}

double pair_density(double v1, double v2, const ScalingParams& l) {
  check_lambda(l);
  if (v1 == v2) throw Error("pair_density: coincident points");
  double s = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double det = -line_entry(i, j, v1, v2, l) * line_entry(j, i, v2, v1, l);
      s += ((i + j) % 2 ? -1 : 1) * det;
    }
  return 9 * s;
}

double four_point_density(std::span<const double, 4> x, const ScalingParams& l) {
  check_lambda(l);
  check_distinct(x);
  // entries depend on (white class of the row, black index of the column)
  double E[4][4][2][2];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (a != b)
        for (int ca = 0; ca < 2; ++ca)
          for (int cb = 0; cb < 2; ++cb) E[a][b][ca][cb] = line_entry(ca, cb, x[a], x[b], l);
  double total = 0;
  for (int mask = 0; mask < 16; ++mask) {
    int c[4] = {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1};
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (a != b) M(a, b) = E[a][b][c[a]][c[b]];
    int parity = c[0] + c[1] + c[2] + c[3];
    total += (parity % 2 ? -1 : 1) * M.determinant();
  }
  return 81 * total;
}

double wick_pair_sum(std::span<const double, 4> x, const ScalingParams& l) {
  auto p = [&](int a, int b) { return pair_density(x[a], x[b], l); };
  return p(0, 1) * p(2, 3) + p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2);
}

const std::array<ConnectedTerm, 24>& connected_terms() {
  using enum Gap;
  static const std::array<ConnectedTerm, 24> terms = {{
      {-1, {{{0, Y1}, {0, Y12}, {0, Y3}, {0, Y23}}}},
      {-1, {{{0, Y1}, {0, Y2}, {0, Y3}, {0, Y123}}}},
      {-1, {{{0, Y2}, {0, Y12}, {0, Y23}, {0, Y123}}}},
      {+1, {{{0, Y3}, {0, Y123}, {1, Y1}, {1, Y2}}}},
      {-1, {{{0, Y3}, {0, Y23}, {1, Y1}, {1, Y12}}}},
      {-1, {{{0, Y23}, {0, Y123}, {1, Y2}, {1, Y12}}}},
      {+1, {{{0, Y12}, {0, Y23}, {1, Y1}, {1, Y3}}}},
      {-1, {{{0, Y2}, {0, Y123}, {1, Y1}, {1, Y3}}}},
      {+1, {{{0, Y1}, {0, Y123}, {1, Y2}, {1, Y3}}}},
      {+1, {{{0, Y1}, {0, Y23}, {1, Y12}, {1, Y3}}}},
      {+1, {{{0, Y12}, {0, Y3}, {1, Y1}, {1, Y23}}}},
      {-1, {{{0, Y12}, {0, Y123}, {1, Y2}, {1, Y23}}}},
      {+1, {{{0, Y1}, {0, Y3}, {1, Y12}, {1, Y23}}}},
      {-1, {{{0, Y2}, {0, Y123}, {1, Y12}, {1, Y23}}}},
      {-1, {{{0, Y1}, {0, Y12}, {1, Y3}, {1, Y23}}}},
      {-1, {{{1, Y1}, {1, Y12}, {1, Y3}, {1, Y23}}}},
      {-1, {{{0, Y2}, {0, Y3}, {1, Y1}, {1, Y123}}}},
      {+1, {{{0, Y1}, {0, Y3}, {1, Y2}, {1, Y123}}}},
      {-1, {{{0, Y12}, {0, Y23}, {1, Y2}, {1, Y123}}}},
      {-1, {{{0, Y2}, {0, Y23}, {1, Y12}, {1, Y123}}}},
      {-1, {{{0, Y1}, {0, Y2}, {1, Y3}, {1, Y123}}}},
      {+1, {{{1, Y1}, {1, Y2}, {1, Y3}, {1, Y123}}}},
      {-1, {{{0, Y2}, {0, Y12}, {1, Y23}, {1, Y123}}}},
      {-1, {{{1, Y2}, {1, Y12}, {1, Y23}, {1, Y123}}}},
  }};
  return terms;
}

namespace {

double prefactor(double L) { return 4 * std::pow(L, 4) / std::pow(kPi, 4); }

double signed_part(double y1, double y2, double y3, const ScalingParams& l, int want) {
  check_lambda(l);
  check_gaps(y1, y2, y3);
  double L = l.norm(), k[2][6];
  for (int g = 0; g < 6; ++g) {
    double d = L * gap_value(static_cast<Gap>(g), y1, y2, y3);
    k[0][g] = bessel_k(0, d);
    k[1][g] = bessel_k(1, d);
  }
  double s = 0;
  for (const auto& t : connected_terms()) {
    if (want != 0 && t.sign != want) continue;
    double p = want == 0 ? t.sign : 1;
    for (auto [order, gap] : t.factors) p *= k[order][static_cast<int>(gap)];
    s += p;
  }
  return s;
}

}  // namespace

double f_connected(double y1, double y2, double y3, const ScalingParams& l) {
  return prefactor(l.norm()) * signed_part(y1, y2, y3, l, 0);
}

double f_positive_part(double y1, double y2, double y3, const ScalingParams& l) {
  return signed_part(y1, y2, y3, l, +1);
}

double f_negative_part(double y1, double y2, double y3, const ScalingParams& l) {
  return signed_part(y1, y2, y3, l, -1);
}

PositivityBounds positivity_bounds(double y2, int n, const ScalingParams& l) {
  if (n < 2) throw Error("positivity_bounds needs n >= 2");
  double c = (std::ldexp(1.0, n) - 2) / (std::ldexp(1.0, n) + 2);
  return {f_positive_part(y2, y2, y2, l), f_negative_part(c * y2, y2, c * y2, l)};
}

std::vector<Interval> small_interval_configuration(int n) {
  double h = std::ldexp(1.0, -n);
  return {{0, h}, {1 - h, 1}, {2, 2 + h}, {3 - h, 3}};
}

namespace {

constexpr double kGradeRatio = 0.15;
// smallest graded panel ~ 1e-12 of the interval, so nodes on touching intervals stay distinct
constexpr int kGradeLevels = 14;

struct Nodes {
  Eigen::VectorXd x, w;
};

// Each 4-cycle of A.1 is a closed walk 0→a→b→c→0 over the four positions, so the box sum of a
// term is a trace of products of node-to-node kernel matrices.
struct CycleTerm {
  int sign;
  std::array<int, 4> order;     // vertex visiting order, starting at position 0
  std::array<int, 4> bessel;    // Bessel order on edge (order[k], order[k+1])
};

std::pair<int, int> gap_pair(Gap g) {
  switch (g) {
    case Gap::Y1: return {0, 1};
    case Gap::Y2: return {1, 2};
    case Gap::Y3: return {2, 3};
    case Gap::Y12: return {0, 2};
    case Gap::Y23: return {1, 3};
    case Gap::Y123: return {0, 3};
  }
  return {0, 0};
}

std::vector<CycleTerm> cycle_terms() {
  std::vector<CycleTerm> out;
  for (const auto& t : connected_terms()) {
    int ord[4][4];
    for (auto& row : ord)
      for (int& v : row) v = -1;
    for (auto [order, gap] : t.factors) {
      auto [a, b] = gap_pair(gap);
      if (ord[a][b] != -1) throw Error("connected term repeats a pair");
      ord[a][b] = ord[b][a] = order;
    }
    CycleTerm c{t.sign, {0, 0, 0, 0}, {0, 0, 0, 0}};
    int prev = -1, cur = 0;
    for (int k = 0; k < 4; ++k) {
      int next = -1;
      for (int v = 0; v < 4 && next == -1; ++v)
        if (v != cur && v != prev && ord[cur][v] != -1) next = v;
      if (next == -1 || (k == 3) != (next == 0)) throw Error("connected term is not a four-cycle");
      c.order[k] = cur;
      c.bessel[k] = ord[cur][next];
      prev = cur;
      cur = next;
    }
    out.push_back(c);
  }
  return out;
}

Nodes nodes_for(const Interval& g, std::span<const Interval> all, int per_panel, int levels) {
  double len = g.length();
  bool left = false, right = false;
  for (const auto& o : all) {
    if (&o == &g) continue;
    left = left || std::abs(o.b - g.a) < len;
    right = right || std::abs(o.a - g.b) < len;
  }
  auto rule = graded_rule(g.a, g.b, per_panel, left || right ? levels : 0, kGradeRatio, left, right, 2);
  Nodes n{Eigen::Map<Eigen::VectorXd>(rule.x.data(), rule.x.size()),
          Eigen::Map<Eigen::VectorXd>(rule.w.data(), rule.w.size())};
  return n;
}

struct BoxSum {
  double value = 0;
  double magnitude = 0;  // Σ |term|, the cancellation scale
};

BoxSum box_integral(std::span<const Interval> iv, const ScalingParams& l, int per_panel, int levels,
                    long* evals) {
  std::array<Nodes, 4> N;
  for (int a = 0; a < 4; ++a) N[a] = nodes_for(iv[a], iv, per_panel, levels);
  double L = l.norm();
  // K[order][a][b](i, j) = w_a(i) K_order(L |x_b(j) - x_a(i)|)
  std::array<std::array<std::array<Eigen::MatrixXd, 4>, 4>, 2> K;
  long count = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      for (int o = 0; o < 2; ++o) K[o][a][b].resize(N[a].x.size(), N[b].x.size());
      for (Eigen::Index i = 0; i < N[a].x.size(); ++i)
        for (Eigen::Index j = 0; j < N[b].x.size(); ++j) {
          double d = L * std::abs(N[b].x[j] - N[a].x[i]);
          K[0][a][b](i, j) = N[a].w[i] * bessel_k(0, d);
          K[1][a][b](i, j) = N[a].w[i] * bessel_k(1, d);
          count += 2;
        }
    }
  auto terms = cycle_terms();
  std::vector<double> vals(terms.size()), mags(terms.size());
  parallel_for(terms.size(), [&](std::size_t t) {
    const auto& c = terms[t];
    auto& o = c.order;
    Eigen::MatrixXd P = K[c.bessel[0]][o[0]][o[1]] * K[c.bessel[1]][o[1]][o[2]];
    Eigen::MatrixXd Q = K[c.bessel[2]][o[2]][o[3]] * K[c.bessel[3]][o[3]][o[0]];
    double v = (P.cwiseProduct(Q.transpose())).sum();
    vals[t] = c.sign * v;
    mags[t] = std::abs(v);
  });
  if (evals) *evals += count;
  return {prefactor(L) * pairwise_sum(vals.data(), vals.size()),
          prefactor(L) * pairwise_sum(mags.data(), mags.size())};
}

std::vector<Interval> sorted_intervals(const CorrelationSpec& spec) {
  if (spec.intervals.size() != 4) throw Error("wick_defect needs exactly four intervals");
  check_lambda(spec.lambda);
  if (!(spec.tol > 0)) throw Error("wick_defect needs a positive tolerance");
  check_disjoint(spec.intervals, true);
  auto iv = spec.intervals;
  std::sort(iv.begin(), iv.end(), [](const Interval& p, const Interval& q) { return p.a < q.a; });
  return iv;
}

}  // namespace

WickReport wick_defect(const CorrelationSpec& spec) {
  auto iv = sorted_intervals(spec);
  WickReport rep;
  long evals = 0;
  const double scale = 81;
  // p-refinement on a fixed geometric mesh; the error estimate is the change between orders
  int per_panel = 4;
  BoxSum prev_sum = box_integral(iv, spec.lambda, per_panel, kGradeLevels, &evals);
  double prev = prev_sum.value, err = std::abs(prev);
  bool done = false;
  for (int round = 0; round < 10 && !done; ++round) {
    per_panel += 2;
    BoxSum cur = box_integral(iv, spec.lambda, per_panel, kGradeLevels, &evals);
    err = std::abs(cur.value - prev);
    prev = cur.value;
    double floor = 64 * std::numeric_limits<double>::epsilon() * cur.magnitude;
    done = scale * err < spec.tol || err < floor;
    err = std::max(err, floor);
  }
  rep.nodes_per_interval = per_panel;
  if (!done) {
    std::ostringstream m;
    m << "wick_defect did not converge: error estimate " << scale * err << " >= tol " << spec.tol;
    throw Error(m.str());
  }
  rep.integral_f = prev;
  rep.defect = scale * prev;
  rep.error_estimate = scale * err;
  rep.evaluations = evals;
  rep.certified = std::abs(rep.defect) > 3 * rep.error_estimate;
  bool separated = true;
  for (int a = 0; a + 1 < 4; ++a) separated = separated && iv[a].b < iv[a + 1].a;
  if (separated) {
    double w = 0;
    auto S = [&](int a, int b) { return s2(iv[a], iv[b], spec.lambda, 0.01 * spec.tol).value; };
    w = S(0, 1) * S(2, 3) + S(0, 2) * S(1, 3) + S(0, 3) * S(1, 2);
    rep.wick = w;
    rep.s4 = w + rep.defect;
  }
  return rep;
}

std::pair<double, double> wick_defect_qmc(const CorrelationSpec& spec, int points, int shifts, std::uint64_t seed) {
  auto iv = sorted_intervals(spec);
  if (points < 1 || shifts < 2) throw Error("wick_defect_qmc needs points >= 1 and shifts >= 2");
  // Kronecker sequence from the generalised golden ratio in four dimensions
  double phi = 1.1673039782614187;
  std::array<double, 4> alpha;
  for (int d = 0; d < 4; ++d) alpha[d] = std::fmod(1 / std::pow(phi, d + 1), 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  double vol = 1;
  for (const auto& g : iv) vol *= g.length();
  std::vector<double> means(shifts);
  for (int s = 0; s < shifts; ++s) {
    std::array<double, 4> shift{u(rng), u(rng), u(rng), u(rng)};
    std::vector<double> vals(points);
    for (int k = 0; k < points; ++k) {
      std::array<double, 4> x;
      for (int d = 0; d < 4; ++d) {
        double t = std::fmod(shift[d] + (k + 1) * alpha[d], 1.0);
        x[d] = iv[d].a + t * iv[d].length();
      }
      vals[k] = f_connected(x[1] - x[0], x[2] - x[1], x[3] - x[2], spec.lambda);
    }
    means[s] = vol * pairwise_sum(vals.data(), vals.size()) / points;
  }
  double m = 0;
  for (double v : means) m += v;
  m /= shifts;
  double var = 0;
  for (double v : means) var += (v - m) * (v - m);
  var /= (shifts - 1);
  return {m, std::sqrt(var / shifts)};
}

}  // namespace dimers
