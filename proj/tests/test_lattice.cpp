#include <random>

#include "dimers/lattice.hpp"
#include "dimers/spectral.hpp"
#include "doctest.h"

using namespace dimers;

TEST_CASE("vertex classes follow coordinate parity") {
  CHECK(classify_vertex(0, 0) == VertexClass::B0);
  CHECK(classify_vertex(1, 1) == VertexClass::B1);
  CHECK(classify_vertex(1, 0) == VertexClass::W0);
  CHECK(classify_vertex(0, 1) == VertexClass::W1);
  CHECK(classify_vertex(-3, -5) == VertexClass::B1);
  CHECK(classify_vertex(-2, 7) == VertexClass::W1);
  for (int x = -4; x <= 4; ++x)
    for (int y = -4; y <= 4; ++y) {
      auto c = classify_vertex(x, y);
      bool black = c == VertexClass::B0 || c == VertexClass::B1;
      CHECK(black == is_black({x, y}));
    }
}

TEST_CASE("domain embedding round-trips") {
  for (int x = -5; x <= 5; ++x)
    for (int y = -5; y <= 5; ++y) {
      Vertex v{x, y};
      CHECK(vertex_in_domain(classify_vertex(v), domain_of(v)) == v);
    }
}

TEST_CASE("edges are validated") {
  CHECK_THROWS_AS(make_edge({0, 0}, {2, 0}), Error);
  CHECK_THROWS_AS(check_edge(Edge{{0, 0}, {1, 0}}), Error);
  Edge e = make_edge({0, 0}, {1, 0});
  CHECK(e.black == Vertex{0, 0});
  CHECK(direction_from_black(e) == Direction::E);
}

TEST_CASE("uniform weights are all one") {
  for (int x = -3; x <= 3; ++x)
    for (int y = -3; y <= 3; ++y) {
      if (!is_black({x, y})) continue;
      for (auto d : {Direction::N, Direction::E, Direction::S, Direction::W}) {
        Edge e{step({x, y}, d), {x, y}};
        CHECK(flipped_edge_weight(e, {}) == 1.0);
        CHECK(drifted_edge_weight(e, {}) == 1.0);
      }
    }
}

TEST_CASE("drifted weights around B0 in N,E,S,W order") {
  DriftedWeights s{1.5, 2.5, 3.5, 4.5};
  Vertex o{0, 0};
  CHECK(drifted_edge_weight({step(o, Direction::N), o}, s) == 1.5);
  CHECK(drifted_edge_weight({step(o, Direction::E), o}, s) == 2.5);
  CHECK(drifted_edge_weight({step(o, Direction::S), o}, s) == 3.5);
  CHECK(drifted_edge_weight({step(o, Direction::W), o}, s) == 4.5);
  Vertex p{2, 0};
  CHECK(drifted_edge_weight({step(p, Direction::E), p}, s) == 2.5);
  CHECK(drifted_edge_weight({{1, 2}, {1, 1}}, s) == 1.0);
}

TEST_CASE("vertical flipped weights alternate") {
  FlippedWeights r{1, 2, 3, 4};
  double a = flipped_edge_weight(make_edge({1, 0}, {1, 1}), r);
  double b = flipped_edge_weight(make_edge({0, 1}, {0, 2}), r);
  CHECK(a != b);
  CHECK(((a == 1 && b == 3) || (a == 3 && b == 1)));
  CHECK(a == 1);
  CHECK(b == 3);
  // along the column x = 0 the vertical weights alternate r1, r3
  CHECK(flipped_edge_weight(make_edge({0, 0}, {0, 1}), r) == 1);
  CHECK(flipped_edge_weight(make_edge({0, 0}, {0, -1}), r) == 3);
}

TEST_CASE("weights are 2x2 periodic") {
  FlippedWeights r{1.1, 2.2, 3.3, 4.4};
  DriftedWeights s{1.1, 2.2, 3.3, 4.4};
  for (int x = -3; x <= 3; ++x)
    for (int y = -3; y <= 3; ++y) {
      if (!is_black({x, y})) continue;
      for (auto d : {Direction::N, Direction::E, Direction::S, Direction::W}) {
        Edge e{step({x, y}, d), {x, y}};
        for (auto [tx, ty] : {std::pair{2, 0}, std::pair{0, 2}}) {
          Edge f{{e.white.x + tx, e.white.y + ty}, {e.black.x + tx, e.black.y + ty}};
          CHECK(flipped_edge_weight(f, r) == flipped_edge_weight(e, r));
          CHECK(drifted_edge_weight(f, s) == drifted_edge_weight(e, s));
          CHECK(kasteleyn_sign(f) == kasteleyn_sign(e));
        }
      }
    }
}

TEST_CASE("Kasteleyn signs: every face has sign product -1") {
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y) {
      Vertex c[4] = {{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}};
      double p = 1;
      for (int k = 0; k < 4; ++k) p *= kasteleyn_sign(make_edge(c[k], c[(k + 1) % 4]));
      CHECK(p == -1.0);
    }
}

TEST_CASE("weight patterns reproduce the printed matrices") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.3, 3.0), ph(-3.14, 3.14);
  for (int rep = 0; rep < 20; ++rep) {
    FlippedWeights r{u(rng), u(rng), u(rng), u(rng)};
    DriftedWeights s{u(rng), u(rng), u(rng), u(rng)};
    auto Kf = fourier_from_pattern([&](const Edge& e) { return flipped_edge_weight(e, r); });
    auto Kd = fourier_from_pattern([&](const Edge& e) { return drifted_edge_weight(e, s); });
    cplx z = std::polar(1.0, ph(rng)), w = std::polar(1.0, ph(rng));
    CHECK((Kf.evaluate(z, w) - kf_matrix(r, z, w)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((Kd.evaluate(z, w) - kd_matrix(s, z, w)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("to_drifted") {
  auto a = to_drifted({1, 1, 1, 1});
  CHECK(a.s1 == 1);
  CHECK(a.s2 == 1);
  CHECK(a.s3 == 1);
  CHECK(a.s4 == 1);
  auto b = to_drifted({1, 2, 3, 1});
  CHECK(b.s1 == doctest::Approx(1));
  CHECK(b.s2 == doctest::Approx(4));
  CHECK(b.s3 == doctest::Approx(9));
  CHECK(b.s4 == doctest::Approx(1));
  auto c = to_drifted({2, 2, 2, 2});
  CHECK(c.s2 == doctest::Approx(1));
  FlippedWeights r{0.7, 1.3, 2.1, 0.4};
  auto d = to_drifted(r), e = to_drifted({3 * r.r1, 3 * r.r2, 3 * r.r3, 3 * r.r4});
  CHECK(d.s1 == doctest::Approx(e.s1));
  CHECK(d.s2 == doctest::Approx(e.s2));
  CHECK(d.s3 == doctest::Approx(e.s3));
  CHECK(d.s4 == doctest::Approx(e.s4));
  CHECK_THROWS_AS(to_drifted({1, 0, 1, 1}), Error);
}

TEST_CASE("height change rule") {
  CHECK(height_change(true, Side::BlackLeft) == 3);
  CHECK(height_change(false, Side::BlackLeft) == -1);
  CHECK(height_change(true, Side::BlackRight) == -3);
  CHECK(height_change(false, Side::BlackRight) == 1);
}
