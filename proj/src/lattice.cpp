#include "dimers/lattice.hpp"

#include <cmath>
#include <cstdlib>

namespace dimers {

namespace {

int floor_div2(int a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }
int ceil_div2(int a) { return -floor_div2(-a); }
bool even(int a) { return (a & 1) == 0; }

void positive_or_throw(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) throw Error(std::string("weight ") + name + " must be positive and finite");
}

}  // namespace

VertexClass classify_vertex(int x, int y) {
  if (even(x) && even(y)) return VertexClass::B0;
  if (!even(x) && !even(y)) return VertexClass::B1;
  if (!even(x)) return VertexClass::W0;
  return VertexClass::W1;
}

bool is_black(Vertex v) { return even(v.x + v.y); }

const char* to_string(VertexClass c) {
  switch (c) {
    case VertexClass::B0: return "B0";
    case VertexClass::B1: return "B1";
    case VertexClass::W0: return "W0";
    case VertexClass::W1: return "W1";
  }
  return "?";
}

int class_index(VertexClass c) { return (c == VertexClass::B1 || c == VertexClass::W1) ? 1 : 0; }

Vertex step(Vertex v, Direction d) {
  switch (d) {
    case Direction::N: return {v.x, v.y + 1};
    case Direction::E: return {v.x + 1, v.y};
    case Direction::S: return {v.x, v.y - 1};
    case Direction::W: return {v.x - 1, v.y};
  }
  return v;
}

Direction opposite(Direction d) { return static_cast<Direction>((static_cast<int>(d) + 2) % 4); }

Direction direction_between(Vertex a, Vertex b) {
  int dx = b.x - a.x, dy = b.y - a.y;
  if (dx == 0 && dy == 1) return Direction::N;
  if (dx == 1 && dy == 0) return Direction::E;
  if (dx == 0 && dy == -1) return Direction::S;
  if (dx == -1 && dy == 0) return Direction::W;
  throw Error("vertices are not grid neighbours");
}

Edge make_edge(Vertex a, Vertex b) {
  direction_between(a, b);
  return is_black(a) ? Edge{b, a} : Edge{a, b};
}

void check_edge(const Edge& e) {
  direction_between(e.white, e.black);
  if (!is_black(e.black)) throw Error("edge black endpoint is white");
}

Direction direction_from_black(const Edge& e) {
  check_edge(e);
  return direction_between(e.black, e.white);
}

void validate(const FlippedWeights& r) {
  positive_or_throw(r.r1, "r1");
  positive_or_throw(r.r2, "r2");
  positive_or_throw(r.r3, "r3");
  positive_or_throw(r.r4, "r4");
}

void validate(const DriftedWeights& s) {
  positive_or_throw(s.s1, "s1");
  positive_or_throw(s.s2, "s2");
  positive_or_throw(s.s3, "s3");
  positive_or_throw(s.s4, "s4");
}

double flipped_edge_weight(const Edge& e, const FlippedWeights& r) {
  Direction d = direction_from_black(e);
  // around B0 (N,E,S,W) = (r1,r2,r3,r4); around B1 the pattern is rotated by two
  bool b0 = classify_vertex(e.black) == VertexClass::B0;
  switch (d) {
    case Direction::N: return b0 ? r.r1 : r.r3;
    case Direction::E: return b0 ? r.r2 : r.r4;
    case Direction::S: return b0 ? r.r3 : r.r1;
    case Direction::W: return b0 ? r.r4 : r.r2;
  }
  return 0;
}

double drifted_edge_weight(const Edge& e, const DriftedWeights& s) {
  Direction d = direction_from_black(e);
  if (classify_vertex(e.black) == VertexClass::B1) return 1.0;
  switch (d) {
    case Direction::N: return s.s1;
    case Direction::E: return s.s2;
    case Direction::S: return s.s3;
    case Direction::W: return s.s4;
  }
  return 0;
}

DriftedWeights to_drifted(const FlippedWeights& r) {
  validate(r);
  double m = r.r1 * r.r4;
  return {r.r1 / r.r4, r.r2 * r.r2 / m, r.r3 * r.r3 / m, r.r4 / r.r1};
}

double kasteleyn_sign(const Edge& e) {
  check_edge(e);
  Direction d = direction_between(e.white, e.black);
  if (classify_vertex(e.white) == VertexClass::W0)
    return (d == Direction::W || d == Direction::S) ? 1.0 : -1.0;
  return (d == Direction::N || d == Direction::W) ? 1.0 : -1.0;
}

DomainIndex domain_of(Vertex v) { return {floor_div2(v.x), ceil_div2(v.y)}; }

Vertex vertex_in_domain(VertexClass c, DomainIndex d) {
  int x = 2 * d.x, y = 2 * d.y;
  switch (c) {
    case VertexClass::B0: return {x, y};
    case VertexClass::W0: return {x + 1, y};
    case VertexClass::W1: return {x, y - 1};
    case VertexClass::B1: return {x + 1, y - 1};
  }
  return {x, y};
}

int height_change(bool covered, Side side) {
  int h = covered ? 3 : -1;
  return side == Side::BlackLeft ? h : -h;
}

}  // namespace dimers
