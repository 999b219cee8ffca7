#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dimers {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vertex {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;
};

enum class VertexClass { B0, B1, W0, W1 };

enum class Direction { N = 0, E = 1, S = 2, W = 3 };

VertexClass classify_vertex(int x, int y);
inline VertexClass classify_vertex(Vertex v) { return classify_vertex(v.x, v.y); }
bool is_black(Vertex v);
const char* to_string(VertexClass c);

// 0 for B0/W0, 1 for B1/W1
int class_index(VertexClass c);

Vertex step(Vertex v, Direction d);
Direction opposite(Direction d);
// direction of b - a for unit-distance neighbours, throws otherwise
Direction direction_between(Vertex a, Vertex b);

struct Edge {
  Vertex white;
  Vertex black;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// accepts endpoints in either order
Edge make_edge(Vertex a, Vertex b);
void check_edge(const Edge& e);
Direction direction_from_black(const Edge& e);

struct FlippedWeights {
  double r1 = 1, r2 = 1, r3 = 1, r4 = 1;
};

struct DriftedWeights {
  double s1 = 1, s2 = 1, s3 = 1, s4 = 1;
};

void validate(const FlippedWeights& r);
void validate(const DriftedWeights& s);

double flipped_edge_weight(const Edge& e, const FlippedWeights& r);
double drifted_edge_weight(const Edge& e, const DriftedWeights& s);
DriftedWeights to_drifted(const FlippedWeights& r);

// Kasteleyn sign of the edge, periodic with the 2x2 cell
double kasteleyn_sign(const Edge& e);

// Fundamental domain: b0 (0,0), w0 (1,0), w1 (0,-1), b1 (1,-1), translated by (2X, 2Y).
struct DomainIndex {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const DomainIndex&, const DomainIndex&) = default;
};

DomainIndex domain_of(Vertex v);
Vertex vertex_in_domain(VertexClass c, DomainIndex d);

enum class Side { BlackLeft, BlackRight };

int height_change(bool covered, Side side);

}  // namespace dimers
