#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "dimers/lattice.hpp"
#include "dimers/spectral.hpp"

namespace dimers {

enum class Boundary { Wired, Torus };

// Nodes of the tree graph sit at (2i, 2j), i = 1..width, j = 1..height (node index (i-1) + width·(j-1)).
// Wired: every step off the grid goes to the root.  Torus: the grid wraps and `root` is a node index.
struct GridRegion {
  int width = 0;
  int height = 0;
  Boundary boundary = Boundary::Wired;
  int root = 0;

  int node_count() const { return width * height; }
  Vertex node_vertex(int k) const { return {2 * (k % width + 1), 2 * (k / width + 1)}; }
  // -1 when the step reaches the wired root
  int neighbor(int k, Direction d) const;
  void validate() const;
};

struct SpanningTree {
  GridRegion region;
  std::vector<std::int8_t> arrow;  // Direction per node, -1 at a torus root
};

// Vertices of a dimer graph: a box with a mask.
struct DimerRegion {
  int x0 = 0, y0 = 0, nx = 0, ny = 0;
  std::vector<char> mask;

  static DimerRegion box(int x0, int y0, int nx, int ny);
  bool contains(Vertex v) const;
  void remove(Vertex v);
  std::size_t index(Vertex v) const { return static_cast<std::size_t>(v.x - x0) + static_cast<std::size_t>(nx) * (v.y - y0); }
  std::vector<Vertex> vertices() const;
};

// Temperley region of a wired grid: [1, 2W+1] x [1, 2H+1] without the dual root (1,1).
DimerRegion temperley_region(const GridRegion& g);

struct DimerConfig {
  std::vector<Edge> edges;
};

void check_perfect_matching(const DimerRegion& R, const DimerConfig& cfg);

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  // engine for one sample; independent of how samples are spread over workers
  std::mt19937_64 engine(std::uint64_t sample) const;
};

struct WilsonOptions {
  std::uint64_t max_steps = 0;  // 0: 10^4 · nodes · (width + height)^2
};

SpanningTree wilson_sample(const GridRegion& g, const DriftedWeights& s, std::mt19937_64& rng, WilsonOptions opt = {});
SpanningTree wilson_sample(const GridRegion& g, const DriftedWeights& s, const RngStream& rng, std::uint64_t sample = 0,
                           WilsonOptions opt = {});

void check_tree(const SpanningTree& t);
double tree_weight(const SpanningTree& t, const DriftedWeights& s);

DimerConfig tree_to_dimers(const SpanningTree& t);
SpanningTree dimers_to_tree(const GridRegion& g, const DimerConfig& cfg);
double dimer_weight(const DimerConfig& cfg, const DriftedWeights& s);

// Heights live on unit faces (lower-left corner (fx, fy)) whose four corners are in the region.
struct HeightField {
  int fx0 = 0, fy0 = 0, nx = 0, ny = 0;
  Vertex base;  // lower-left corner of the face with height 0
  std::vector<int> h;
  std::vector<char> present;

  bool has(int fx, int fy) const;
  int at(int fx, int fy) const;
};

// base face defaults to the top-right face of the region's box
HeightField dimer_to_height(const DimerRegion& R, const DimerConfig& cfg);
HeightField dimer_to_height(const DimerRegion& R, const DimerConfig& cfg, Vertex base_face);
// sum of height changes around a closed path of adjacent faces
int height_loop_sum(const DimerRegion& R, const DimerConfig& cfg, const std::vector<Vertex>& faces);

// number of elementary face loops (around interior vertices) with a nonzero height sum
int height_loop_defects(const DimerRegion& R, const DimerConfig& cfg);

// all directed spanning trees of a small region (4^nodes assignments are scanned)
void enumerate_trees(const GridRegion& g, const std::function<void(const SpanningTree&)>& visit);
std::uint64_t tree_key(const SpanningTree& t);

// exact P(arrow at node k points in d), from the killed walk's Green function
Eigen::MatrixX4d arrow_marginals(const GridRegion& g, const DriftedWeights& s);

struct ChiSquare {
  double statistic = 0;
  int dof = 0;
  double p_value = 0;
};

// sampled tree frequencies against exact enumeration
ChiSquare tree_chi_square(const GridRegion& g, const DriftedWeights& s, std::uint64_t samples, const RngStream& rng);

struct McEstimate {
  double estimate = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
  bool near_boundary = false;
};

McEstimate mc_edge_probability(const GridRegion& g, const DriftedWeights& s, const Edge& e, std::uint64_t samples,
                               const RngStream& rng);

struct McCovariance {
  Eigen::MatrixXd estimate;
  Eigen::MatrixXd std_error;
  std::uint64_t samples = 0;
};

// faces by lower-left corner; heights are relative to the top-right boundary face
McCovariance mc_height_covariance(const GridRegion& g, const DriftedWeights& s, const std::vector<Vertex>& faces,
                                  std::uint64_t samples, const RngStream& rng);

struct UrbanRenewal {
  double t = 0;
  double s = 0;
  FlippedWeights weights;     // (1, s, s, 1)
  double city_constant = 2;   // partition functions differ by this factor per city
};

// Square-octagon weight t maps to the flipped square grid (1, s, s, 1) with s = t²/2.
UrbanRenewal urban_renewal_weights(double t);

struct EdgeClassProbability {
  int white_class = 0;
  int black_class = 0;
  int dx = 0, dy = 0;  // monomial of the edge in K(white, black)
  double weight = 0;   // |K entry|
  double probability = 0;
};

// single-edge probabilities of every edge class of a periodic model
std::vector<EdgeClassProbability> edge_class_probabilities(const PeriodicModel& m, double tol = 1e-11);

}  // namespace dimers
