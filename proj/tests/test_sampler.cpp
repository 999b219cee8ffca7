#include <cmath>
#include <map>
#include <random>
#include <set>

#include "dimers/parallel.hpp"
#include "dimers/sampler.hpp"
#include "doctest.h"

using namespace dimers;

namespace {

// number of directed spanning trees by the matrix-tree theorem
double matrix_tree_count(const GridRegion& g) {
  const int n = g.node_count();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (auto d : {Direction::N, Direction::E, Direction::S, Direction::W}) {
      L(k, k) += 1;
      int v = g.neighbor(k, d);
      if (v >= 0) L(k, v) -= 1;
    }
  if (g.boundary == Boundary::Torus) {
    std::vector<int> keep;
    for (int k = 0; k < n; ++k)
      if (k != g.root) keep.push_back(k);
    Eigen::MatrixXd M(n - 1, n - 1);
    for (int a = 0; a < n - 1; ++a)
      for (int b = 0; b < n - 1; ++b) M(a, b) = L(keep[a], keep[b]);
    return M.determinant();
  }
  return L.determinant();
}

std::vector<Vertex> random_loop(const HeightField& H, std::mt19937_64& rng) {
  // rectangle boundary of faces, walked counter-clockwise
  std::uniform_int_distribution<int> X(H.fx0 + 1, H.fx0 + H.nx - 2), Y(H.fy0 + 1, H.fy0 + H.ny - 2);
  int x1 = X(rng), x2 = X(rng), y1 = Y(rng), y2 = Y(rng);
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  if (x1 == x2) ++x2;
  if (y1 == y2) ++y2;
  std::vector<Vertex> p;
  for (int x = x1; x < x2; ++x) p.push_back({x, y1});
  for (int y = y1; y < y2; ++y) p.push_back({x2, y});
  for (int x = x2; x > x1; --x) p.push_back({x, y2});
  for (int y = y2; y > y1; --y) p.push_back({x1, y});
  p.push_back({x1, y1});
  return p;
}

}  // namespace

TEST_CASE("1x1 region: the arrow follows the step law") {
  GridRegion g{1, 1};
  DriftedWeights s{1, 2, 3, 4};
  std::map<int, double> exact;
  enumerate_trees(g, [&](const SpanningTree& t) { exact[t.arrow[0]] = tree_weight(t, s) / 10; });
  CHECK(exact.size() == 4);
  CHECK(exact[0] == doctest::Approx(0.1));
  CHECK(exact[3] == doctest::Approx(0.4));
  auto M = arrow_marginals(g, s);
  for (int d = 0; d < 4; ++d) CHECK(M(0, d) == doctest::Approx((d + 1) / 10.0));
  int counts[4] = {};
  RngStream rng{99, 0};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[wilson_sample(g, s, rng, i).arrow[0]];
  for (int d = 0; d < 4; ++d) {
    double p = (d + 1) / 10.0;
    CHECK(std::abs(counts[d] / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("enumeration matches the matrix-tree theorem") {
  for (auto g : {GridRegion{2, 2}, GridRegion{3, 3}, GridRegion{2, 3}, GridRegion{3, 2, Boundary::Torus, 4},
                 GridRegion{2, 2, Boundary::Torus, 0}}) {
    std::uint64_t n = 0;
    std::set<std::uint64_t> keys;
    enumerate_trees(g, [&](const SpanningTree& t) {
      ++n;
      keys.insert(tree_key(t));
      check_tree(t);
    });
    CHECK(n == keys.size());
    CHECK(static_cast<double>(n) == doctest::Approx(matrix_tree_count(g)));
  }
  std::uint64_t n22 = 0;
  enumerate_trees({2, 2}, [&](const SpanningTree&) { ++n22; });
  CHECK(n22 == 192);
  CHECK_THROWS_AS(enumerate_trees({4, 4}, [](const SpanningTree&) {}), Error);
}

TEST_CASE("sampled trees match exact enumeration (chi-square)") {
  GridRegion g{2, 2};
  auto u = tree_chi_square(g, {1, 1, 1, 1}, 100000, {2024, 1});
  auto d = tree_chi_square(g, {1, 1, 2, 2}, 100000, {2024, 2});
  CHECK(u.dof == 191);
  CHECK(u.p_value > 0.01);
  CHECK(d.p_value > 0.01);
}

TEST_CASE("arrow marginals from the Green function match enumeration") {
  DriftedWeights s{1, 2, 0.5, 1.5};
  for (auto g : {GridRegion{3, 3}, GridRegion{3, 2, Boundary::Torus, 2}}) {
    Eigen::MatrixX4d E = Eigen::MatrixX4d::Zero(g.node_count(), 4);
    double Z = 0;
    enumerate_trees(g, [&](const SpanningTree& t) {
      double w = tree_weight(t, s);
      Z += w;
      for (int k = 0; k < g.node_count(); ++k)
        if (t.arrow[k] >= 0) E(k, t.arrow[k]) += w;
    });
    E /= Z;
    CHECK((E - arrow_marginals(g, s)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("deep-interior arrow frequencies converge to the exact marginals") {
  GridRegion g{8, 8};
  DriftedWeights s{1, 1.3, 0.8, 1.1};
  auto M = arrow_marginals(g, s);
  int node = 3 + 8 * 4;
  const int n = 20000;
  int counts[4] = {};
  RngStream rng{5, 3};
  for (int i = 0; i < n; ++i) ++counts[wilson_sample(g, s, rng, i).arrow[node]];
  for (int d = 0; d < 4; ++d) {
    double p = M(node, d);
    CHECK(std::abs(counts[d] / double(n) - p) < 3 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("sampling is reproducible and independent of the worker count") {
  GridRegion g{10, 7};
  DriftedWeights s{1, 2, 1, 0.5};
  RngStream a{17, 4};
  CHECK(wilson_sample(g, s, a, 3).arrow == wilson_sample(g, s, a, 3).arrow);
  CHECK(wilson_sample(g, s, a, 3).arrow != wilson_sample(g, s, a, 4).arrow);
  CHECK(wilson_sample(g, s, a, 3).arrow != wilson_sample(g, s, RngStream{17, 5}, 3).arrow);
  Edge e{{11, 8}, {10, 8}};
  set_default_workers(1);
  auto one = mc_edge_probability(g, s, e, 300, a);
  set_default_workers(4);
  auto four = mc_edge_probability(g, s, e, 300, a);
  set_default_workers(1);
  CHECK(one.estimate == four.estimate);
}

TEST_CASE("step cap reports diagnostics") {
  WilsonOptions o;
  o.max_steps = 5;
  std::mt19937_64 rng(1);
  CHECK_THROWS_WITH_AS(wilson_sample({20, 20}, {1, 1, 1, 1}, rng, o), doctest::Contains("step cap"), Error);
}

TEST_CASE("tree to dimers: exhaustive bijection on 3x3") {
  GridRegion g{3, 3};
  auto R = temperley_region(g);
  DriftedWeights s{0.7, 1.9, 1.2, 0.4};
  std::set<std::vector<Edge>> seen;
  std::size_t n = 0;
  double worst = 0;
  enumerate_trees(g, [&](const SpanningTree& t) {
    auto d = tree_to_dimers(t);
    check_perfect_matching(R, d);
    auto edges = d.edges;
    std::sort(edges.begin(), edges.end());
    seen.insert(edges);
    if (dimers_to_tree(g, d).arrow != t.arrow) worst = 1;
    worst = std::max(worst, std::abs(dimer_weight(d, s) / tree_weight(t, s) - 1));
    ++n;
  });
  CHECK(n == 100352);
  CHECK(seen.size() == n);
  CHECK(worst < 1e-12);
}

TEST_CASE("tree to dimers round trip on sampled trees") {
  RngStream rng{8, 8};
  for (auto g : {GridRegion{4, 4}, GridRegion{7, 5}, GridRegion{12, 12}}) {
    for (int i = 0; i < 30; ++i) {
      auto t = wilson_sample(g, {1, 1.5, 1, 0.6}, rng, i);
      auto d = tree_to_dimers(t);
      check_perfect_matching(temperley_region(g), d);
      CHECK(dimers_to_tree(g, d).arrow == t.arrow);
    }
  }
}

TEST_CASE("invalid trees and boundaries are rejected") {
  GridRegion g{2, 1};
  SpanningTree cyc{g, {1, 3}};  // E then W: a 2-cycle
  CHECK_THROWS_AS(check_tree(cyc), Error);
  CHECK_THROWS_AS(tree_to_dimers(cyc), Error);
  GridRegion tor{3, 3, Boundary::Torus, 0};
  std::mt19937_64 rng(3);
  auto t = wilson_sample(tor, {1, 1, 1, 1}, rng);
  check_tree(t);
  CHECK(t.arrow[0] == -1);
  CHECK_THROWS_AS(tree_to_dimers(t), Error);
  CHECK_THROWS_AS(GridRegion({0, 3}).validate(), Error);
  CHECK_THROWS_AS(GridRegion({3, 3, Boundary::Torus, 9}).validate(), Error);
  DimerConfig bad;
  bad.edges.push_back({{2, 1}, {1, 1}});
  CHECK_THROWS_AS(check_perfect_matching(temperley_region({1, 1}), bad), Error);
}

TEST_CASE("staggered brick wall heights") {
  // rows matched (x, x+1) with x of the row's parity; the region is 10 x 6 vertices
  auto R = DimerRegion::box(0, 0, 10, 6);
  DimerConfig cfg;
  for (int y = 0; y < 6; ++y) {
    if (y % 2 == 1) {
      R.remove({0, y});
      R.remove({9, y});
    }
    for (int x = y % 2; x + 1 < 10 - (y % 2); x += 2) cfg.edges.push_back(make_edge({x, y}, {x + 1, y}));
  }
  auto H = dimer_to_height(R, cfg, {2, 0});
  // affine along columns with period two: steps alternate 3 and 1
  for (int fx = 1; fx <= 7; ++fx) {
    int d = H.at(fx, 2) - H.at(fx, 0);
    CHECK(std::abs(d) == 4);
    for (int fy = 0; fy + 2 <= 4; ++fy) {
      CHECK(H.at(fx, fy + 2) - H.at(fx, fy) == d);
      CHECK(std::abs(H.at(fx, fy + 1) - H.at(fx, fy)) % 2 == 1);
    }
  }
  // going counter-clockwise round each interior black vertex: +3 across the dimer, -1 three times
  for (int x = 2; x <= 7; ++x)
    for (int y = 1; y <= 4; ++y) {
      if (!is_black({x, y})) continue;
      Vertex loop[5] = {{x, y - 1}, {x, y}, {x - 1, y}, {x - 1, y - 1}, {x, y - 1}};
      std::multiset<int> jumps;
      for (int k = 0; k < 4; ++k) jumps.insert(H.at(loop[k + 1].x, loop[k + 1].y) - H.at(loop[k].x, loop[k].y));
      CHECK(jumps == std::multiset<int>{3, -1, -1, -1});
    }
}

TEST_CASE("a plaquette flip changes one face height by 4") {
  auto R = DimerRegion::box(0, 0, 4, 4);
  DimerConfig a, b;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; x += 2) a.edges.push_back(make_edge({x, y}, {x + 1, y}));
  // flip the square with corners (2,1), (3,2)
  for (const auto& e : a.edges)
    if (!(e.white.x >= 2 && e.white.y >= 1 && e.white.y <= 2)) b.edges.push_back(e);
  b.edges.push_back(make_edge({2, 1}, {2, 2}));
  b.edges.push_back(make_edge({3, 1}, {3, 2}));
  auto Ha = dimer_to_height(R, a, {0, 0}), Hb = dimer_to_height(R, b, {0, 0});
  int changed = 0;
  for (int fx = 0; fx < 3; ++fx)
    for (int fy = 0; fy < 3; ++fy) {
      int d = Hb.at(fx, fy) - Ha.at(fx, fy);
      if (d != 0) {
        ++changed;
        CHECK(std::abs(d) == 4);
        CHECK(fx == 2);
        CHECK(fy == 1);
      }
    }
  CHECK(changed == 1);
}

TEST_CASE("sampled height fields: loops sum to zero") {
  GridRegion g{9, 7};
  auto R = temperley_region(g);
  RngStream rng{31, 0};
  std::mt19937_64 pick(4);
  for (int i = 0; i < 40; ++i) {
    auto d = tree_to_dimers(wilson_sample(g, {1, 1.2, 0.9, 1}, rng, i));
    auto H = dimer_to_height(R, d);
    auto H2 = dimer_to_height(R, d, {5, 5});
    for (int k = 0; k < 10; ++k) CHECK(height_loop_sum(R, d, random_loop(H, pick)) == 0);
    // a different base face only shifts the field
    int shift = H.at(5, 5);
    for (int fx = 2; fx <= 2 * g.width; ++fx)
      for (int fy = 2; fy <= 2 * g.height; ++fy) CHECK(H.at(fx, fy) - H2.at(fx, fy) == shift);
  }
  CHECK_THROWS_AS(height_loop_sum(R, DimerConfig{}, {{2, 2}, {3, 2}}), Error);
}

TEST_CASE("uniform center edge probability and standard-error scaling") {
  GridRegion g{32, 32};
  Edge e{{33, 32}, {32, 32}};
  auto a = mc_edge_probability(g, {1, 1, 1, 1}, e, 4000, {3, 0});
  auto b = mc_edge_probability(g, {1, 1, 1, 1}, e, 8000, {3, 1});
  CHECK_FALSE(a.near_boundary);
  CHECK(std::abs(a.estimate - 0.25) < 3 * a.std_error + 0.005);
  CHECK(a.std_error / b.std_error == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  Edge corner{{3, 2}, {2, 2}};
  CHECK(mc_edge_probability(g, {1, 1, 1, 1}, corner, 10, {3, 0}).near_boundary);
  CHECK_THROWS_AS(mc_edge_probability(g, {1, 1, 1, 1}, Edge{{101, 2}, {100, 2}}, 10, {3, 0}), Error);
}

TEST_CASE("drifted center edges match the infinite-volume local statistics") {
  GridRegion g{32, 32};
  auto s = to_drifted({1, 0.95, 0.95, 1});
  InverseKasteleyn inv(PeriodicModel::drifted(s));
  Vertex c{32, 32};
  for (auto d : {Direction::N, Direction::E, Direction::S, Direction::W}) {
    Edge e{step(c, d), c};
    double exact = local_stats(std::span<const Edge>(&e, 1), inv);
    auto m = mc_edge_probability(g, s, e, 4000, {11, static_cast<std::uint64_t>(d)});
    CHECK(std::abs(m.estimate - exact) < 3 * m.std_error + 0.005);
  }
}

TEST_CASE("height covariance: nonnegative variance, decay with separation") {
  GridRegion g{16, 16};
  std::vector<Vertex> f = {{16, 16}, {18, 16}, {28, 16}};
  auto c = mc_height_covariance(g, to_drifted({1, 0.7, 0.7, 1}), f, 1500, {12, 0});
  for (int i = 0; i < 3; ++i) CHECK(c.estimate(i, i) >= 0);
  CHECK(c.estimate(0, 0) > c.estimate(0, 1));
  CHECK(c.estimate(0, 1) - c.estimate(0, 2) > 0);
  CHECK((c.estimate - c.estimate.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("urban renewal weights") {
  auto u = urban_renewal_weights(std::sqrt(2.0));
  CHECK(u.s == doctest::Approx(1));
  CHECK(u.city_constant == 2);
  CHECK(urban_renewal_weights(0.5).s == doctest::Approx(0.125));
  CHECK_THROWS_AS(urban_renewal_weights(0), Error);
  // the scaling family: t = sqrt(2)(1 - a) gives s = (1 - a)^2
  double a = 0.03;
  CHECK(urban_renewal_weights(std::sqrt(2.0) * (1 - a)).s == doctest::Approx((1 - a) * (1 - a)));
}

double flipped_prob(const std::vector<EdgeClassProbability>& f, int wc, int bc, int dx, int dy) {
  for (const auto& e : f)
    if (e.white_class == wc && e.black_class == bc && e.dx == dx && e.dy == dy) return e.probability;
  throw Error("edge class not found");
}

TEST_CASE("urban renewal: square-octagon local statistics match the mapped square grid") {
  for (double t : {0.8, 1.0, std::sqrt(2.0), 1.7}) {
    auto u = urban_renewal_weights(t);
    auto so = edge_class_probabilities(PeriodicModel::square_octagon(t));
    auto f = edge_class_probabilities(PeriodicModel::flipped(u.weights));
    // w0-b0 at (0,0) carries weight s, w0-b0 at (1,0) weight 1
    double p_s = flipped_prob(f, 0, 0, 0, 0), p_1 = flipped_prob(f, 0, 0, 1, 0);
    CHECK(so.size() == 12);
    for (const auto& e : so) {
      bool t_edge = std::abs(e.white_class - e.black_class) == 2;
      CHECK(e.probability == doctest::Approx(t_edge ? 2 * p_s : p_1).epsilon(1e-9));
    }
    // probabilities at every white vertex sum to one on both sides
    for (const auto* v : {&so, &f}) {
      std::map<int, double> sum;
      for (const auto& e : *v) sum[e.white_class] += e.probability;
      for (auto [w, p] : sum) CHECK(p == doctest::Approx(1).epsilon(1e-10));
    }
  }
}

TEST_CASE("urban renewal: s = sqrt(2t) does not reproduce the local statistics") {
  double t = 1.0, s = std::sqrt(2 * t);
  auto so = edge_class_probabilities(PeriodicModel::square_octagon(t));
  auto f = edge_class_probabilities(PeriodicModel::flipped({1, s, s, 1}));
  CHECK(std::abs(so[0].probability - flipped_prob(f, 0, 0, 1, 0)) > 0.1);
}
