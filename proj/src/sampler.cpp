#include "dimers/sampler.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "dimers/parallel.hpp"

namespace dimers {

namespace {

constexpr Direction kDirs[4] = {Direction::N, Direction::E, Direction::S, Direction::W};

std::pair<int, int> unit(Direction d) {
  switch (d) {
    case Direction::N: return {0, 1};
    case Direction::E: return {1, 0};
    case Direction::S: return {0, -1};
    case Direction::W: return {-1, 0};
  }
  return {0, 0};
}

double step_weight(const DriftedWeights& s, Direction d) {
  switch (d) {
    case Direction::N: return s.s1;
    case Direction::E: return s.s2;
    case Direction::S: return s.s3;
    case Direction::W: return s.s4;
  }
  return 0;
}

std::string vstr(Vertex v) {
  std::ostringstream o;
  o << "(" << v.x << ", " << v.y << ")";
  return o.str();
}

}  // namespace

int GridRegion::neighbor(int k, Direction d) const {
  auto [dx, dy] = unit(d);
  int i = k % width + dx, j = k / width + dy;
  if (boundary == Boundary::Torus) {
    i = (i + width) % width;
    j = (j + height) % height;
  } else if (i < 0 || j < 0 || i >= width || j >= height) {
    return -1;
  }
  return i + width * j;
}

void GridRegion::validate() const {
  if (width < 1 || height < 1) throw Error("grid region needs positive width and height");
  if (static_cast<long long>(width) * height > (1LL << 28)) throw Error("grid region too large");
  if (boundary == Boundary::Torus && (root < 0 || root >= node_count())) throw Error("torus root out of range");
}

DimerRegion DimerRegion::box(int x0, int y0, int nx, int ny) {
  if (nx < 1 || ny < 1) throw Error("dimer region box must be nonempty");
  DimerRegion r;
  r.x0 = x0, r.y0 = y0, r.nx = nx, r.ny = ny;
  r.mask.assign(static_cast<std::size_t>(nx) * ny, 1);
  return r;
}

bool DimerRegion::contains(Vertex v) const {
  if (v.x < x0 || v.y < y0 || v.x >= x0 + nx || v.y >= y0 + ny) return false;
  return mask[index(v)] != 0;
}

void DimerRegion::remove(Vertex v) {
  if (contains(v)) mask[index(v)] = 0;
}

std::vector<Vertex> DimerRegion::vertices() const {
  std::vector<Vertex> out;
  for (int y = y0; y < y0 + ny; ++y)
    for (int x = x0; x < x0 + nx; ++x)
      if (contains({x, y})) out.push_back({x, y});
  return out;
}

DimerRegion temperley_region(const GridRegion& g) {
  g.validate();
  if (g.boundary != Boundary::Wired) throw Error("Temperley region needs a wired boundary");
  auto R = DimerRegion::box(1, 1, 2 * g.width + 1, 2 * g.height + 1);
  R.remove({1, 1});
  return R;
}

void check_perfect_matching(const DimerRegion& R, const DimerConfig& cfg) {
  std::vector<char> hit(R.mask.size(), 0);
  for (const auto& e : cfg.edges) {
    check_edge(e);
    for (Vertex v : {e.white, e.black}) {
      if (!R.contains(v)) throw Error("dimer endpoint " + vstr(v) + " is outside the region");
      if (hit[R.index(v)]++) throw Error("vertex " + vstr(v) + " is covered twice");
    }
  }
  for (Vertex v : R.vertices())
    if (!hit[R.index(v)]) throw Error("vertex " + vstr(v) + " is not covered");
}

std::mt19937_64 RngStream::engine(std::uint64_t sample) const {
  auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x); };
  auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(sample), hi(sample)};
  return std::mt19937_64(seq);
}

SpanningTree wilson_sample(const GridRegion& g, const DriftedWeights& s, std::mt19937_64& rng, WilsonOptions opt) {
  g.validate();
  validate(s);
  const int n = g.node_count();
  std::uint64_t cap = opt.max_steps;
  if (cap == 0) {
    double span = g.width + g.height;
    cap = static_cast<std::uint64_t>(std::min(1e4 * n * span * span, 1e18));
  }
  double tot = s.s1 + s.s2 + s.s3 + s.s4;
  double c1 = s.s1 / tot, c2 = c1 + s.s2 / tot, c3 = c2 + s.s3 / tot;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  SpanningTree t{g, std::vector<std::int8_t>(n, -1)};
  std::vector<char> in(n, 0);
  if (g.boundary == Boundary::Torus) in[g.root] = 1;
  std::uint64_t steps = 0;
  for (int i = 0; i < n; ++i) {
    int u = i;
    while (!in[u]) {
      double x = U(rng);
      int d = x < c1 ? 0 : x < c2 ? 1 : x < c3 ? 2 : 3;
      t.arrow[u] = static_cast<std::int8_t>(d);
      if (++steps > cap) {
        std::ostringstream m;
        m << "wilson_sample: step cap " << cap << " reached with " << i << " of " << n << " nodes started";
        throw Error(m.str());
      }
      int v = g.neighbor(u, kDirs[d]);
      if (v < 0) break;
      u = v;
    }
    u = i;
    while (!in[u]) {
      in[u] = 1;
      int v = g.neighbor(u, kDirs[t.arrow[u]]);
      if (v < 0) break;
      u = v;
    }
  }
  return t;
}

SpanningTree wilson_sample(const GridRegion& g, const DriftedWeights& s, const RngStream& rng, std::uint64_t sample,
                           WilsonOptions opt) {
  auto e = rng.engine(sample);
  return wilson_sample(g, s, e, opt);
}

void check_tree(const SpanningTree& t) {
  const auto& g = t.region;
  g.validate();
  const int n = g.node_count();
  if (static_cast<int>(t.arrow.size()) != n) throw Error("tree arrow count does not match the region");
  std::vector<char> state(n, 0);
  std::vector<int> path;
  for (int i = 0; i < n; ++i) {
    int u = i;
    path.clear();
    while (u >= 0 && state[u] == 0) {
      bool is_root = g.boundary == Boundary::Torus && u == g.root;
      if (is_root) {
        if (t.arrow[u] != -1) throw Error("torus root carries an arrow");
        break;
      }
      if (t.arrow[u] < 0 || t.arrow[u] > 3) throw Error("node without a valid arrow");
      state[u] = 1;
      path.push_back(u);
      u = g.neighbor(u, kDirs[t.arrow[u]]);
    }
    if (u >= 0 && state[u] == 1) throw Error("tree arrows contain a directed cycle");
    for (int p : path) state[p] = 2;
    if (u >= 0) state[u] = 2;
  }
}

double tree_weight(const SpanningTree& t, const DriftedWeights& s) {
  double w = 1;
  for (auto a : t.arrow)
    if (a >= 0) w *= step_weight(s, kDirs[a]);
  return w;
}

DimerConfig tree_to_dimers(const SpanningTree& t) {
  const auto& g = t.region;
  if (g.boundary != Boundary::Wired) throw Error("tree_to_dimers: the torus is not Temperley-compatible");
  check_tree(t);
  const int X = 2 * g.width + 3, Y = 2 * g.height + 3;
  auto id = [X](int x, int y) { return static_cast<std::size_t>(x) + static_cast<std::size_t>(X) * y; };
  std::vector<char> used(static_cast<std::size_t>(X) * Y, 0);
  DimerConfig cfg;
  cfg.edges.reserve(2 * static_cast<std::size_t>(g.node_count()) + g.width + g.height + 1);
  for (int k = 0; k < g.node_count(); ++k) {
    Vertex b = g.node_vertex(k), w = step(b, kDirs[t.arrow[k]]);
    used[id(w.x, w.y)] = 1;
    cfg.edges.push_back({w, b});
  }
  // dual tree on the odd sublattice, rooted at (1,1), through the unused whites
  const int xmax = 2 * g.width + 1, ymax = 2 * g.height + 1;
  std::vector<char> seen(used.size(), 0);
  std::deque<Vertex> q{{1, 1}};
  seen[id(1, 1)] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    Vertex c = q.front();
    q.pop_front();
    for (Direction d : kDirs) {
      Vertex w = step(c, d), n = step(w, d);
      if (n.x < 1 || n.y < 1 || n.x > xmax || n.y > ymax) continue;
      if (used[id(w.x, w.y)] || seen[id(n.x, n.y)]) continue;
      seen[id(n.x, n.y)] = 1;
      used[id(w.x, w.y)] = 1;
      cfg.edges.push_back({w, n});
      q.push_back(n);
      ++reached;
    }
  }
  std::size_t duals = static_cast<std::size_t>(g.width + 1) * (g.height + 1);
  if (reached != duals) throw Error("tree_to_dimers: dual graph is disconnected");
  if (cfg.edges.size() * 2 != temperley_region(g).vertices().size())
    throw Error("tree_to_dimers: dual edges do not form a tree");
  return cfg;
}

SpanningTree dimers_to_tree(const GridRegion& g, const DimerConfig& cfg) {
  auto R = temperley_region(g);
  check_perfect_matching(R, cfg);
  std::vector<Vertex> partner(R.mask.size());
  for (const auto& e : cfg.edges) partner[R.index(e.black)] = e.white;
  SpanningTree t{g, std::vector<std::int8_t>(g.node_count(), -1)};
  for (int k = 0; k < g.node_count(); ++k) {
    Vertex b = g.node_vertex(k);
    t.arrow[k] = static_cast<std::int8_t>(direction_between(b, partner[R.index(b)]));
  }
  check_tree(t);
  return t;
}

double dimer_weight(const DimerConfig& cfg, const DriftedWeights& s) {
  double w = 1;
  for (const auto& e : cfg.edges) w *= drifted_edge_weight(e, s);
  return w;
}

bool HeightField::has(int fx, int fy) const {
  if (fx < fx0 || fy < fy0 || fx >= fx0 + nx || fy >= fy0 + ny) return false;
  return present[static_cast<std::size_t>(fx - fx0) + static_cast<std::size_t>(nx) * (fy - fy0)] != 0;
}

int HeightField::at(int fx, int fy) const {
  if (!has(fx, fy)) throw Error("no face at " + vstr({fx, fy}));
  return h[static_cast<std::size_t>(fx - fx0) + static_cast<std::size_t>(nx) * (fy - fy0)];
}

namespace {

// covered[2 idx(v)] for the edge v - v+(1,0), covered[2 idx(v) + 1] for v - v+(0,1)
std::vector<char> covered_edges(const DimerRegion& R, const DimerConfig& cfg) {
  std::vector<char> c(2 * R.mask.size(), 0);
  for (const auto& e : cfg.edges) {
    Vertex a = std::min(e.white, e.black, [](Vertex p, Vertex q) { return p.x + p.y < q.x + q.y; });
    Vertex b = a == e.white ? e.black : e.white;
    c[2 * R.index(a) + (b.y != a.y ? 1 : 0)] = 1;
  }
  return c;
}

bool face_present(const DimerRegion& R, Vertex f) {
  return R.contains(f) && R.contains({f.x + 1, f.y}) && R.contains({f.x, f.y + 1}) && R.contains({f.x + 1, f.y + 1});
}

int face_change(const DimerRegion& R, const std::vector<char>& cov, Vertex a, Vertex b) {
  auto side = [](Vertex left) { return is_black(left) ? Side::BlackLeft : Side::BlackRight; };
  int dx = b.x - a.x, dy = b.y - a.y;
  if (dx == 1 && dy == 0) return height_change(cov[2 * R.index({a.x + 1, a.y}) + 1], side({a.x + 1, a.y + 1}));
  if (dx == 0 && dy == 1) return height_change(cov[2 * R.index({a.x, a.y + 1})], side({a.x, a.y + 1}));
  if ((dx == -1 && dy == 0) || (dx == 0 && dy == -1)) return -face_change(R, cov, b, a);
  throw Error("faces " + vstr(a) + " and " + vstr(b) + " are not adjacent");
}

}  // namespace

HeightField dimer_to_height(const DimerRegion& R, const DimerConfig& cfg) {
  return dimer_to_height(R, cfg, {R.x0 + R.nx - 2, R.y0 + R.ny - 2});
}

HeightField dimer_to_height(const DimerRegion& R, const DimerConfig& cfg, Vertex base) {
  check_perfect_matching(R, cfg);
  if (!face_present(R, base)) throw Error("base face " + vstr(base) + " is not in the region");
  auto cov = covered_edges(R, cfg);
  HeightField H;
  H.fx0 = R.x0, H.fy0 = R.y0, H.nx = std::max(R.nx - 1, 1), H.ny = std::max(R.ny - 1, 1);
  H.base = base;
  H.h.assign(static_cast<std::size_t>(H.nx) * H.ny, 0);
  H.present.assign(H.h.size(), 0);
  auto fid = [&](Vertex f) { return static_cast<std::size_t>(f.x - H.fx0) + static_cast<std::size_t>(H.nx) * (f.y - H.fy0); };
  std::deque<Vertex> q{base};
  H.present[fid(base)] = 1;
  while (!q.empty()) {
    Vertex f = q.front();
    q.pop_front();
    for (Direction d : kDirs) {
      Vertex g = step(f, d);
      if (!face_present(R, g) || H.present[fid(g)]) continue;
      H.present[fid(g)] = 1;
      H.h[fid(g)] = H.h[fid(f)] + face_change(R, cov, f, g);
      q.push_back(g);
    }
  }
  return H;
}

int height_loop_sum(const DimerRegion& R, const DimerConfig& cfg, const std::vector<Vertex>& faces) {
  if (faces.size() < 2 || faces.front() != faces.back()) throw Error("height loop must be closed");
  auto cov = covered_edges(R, cfg);
  int sum = 0;
  for (std::size_t i = 0; i + 1 < faces.size(); ++i) {
    for (Vertex f : {faces[i], faces[i + 1]})
      if (!face_present(R, f)) throw Error("loop face " + vstr(f) + " is not in the region");
    sum += face_change(R, cov, faces[i], faces[i + 1]);
  }
  return sum;
}

int height_loop_defects(const DimerRegion& R, const DimerConfig& cfg) {
  check_perfect_matching(R, cfg);
  auto cov = covered_edges(R, cfg);
  int bad = 0;
  for (Vertex v : R.vertices()) {
    Vertex f[5] = {{v.x, v.y - 1}, {v.x, v.y}, {v.x - 1, v.y}, {v.x - 1, v.y - 1}, {v.x, v.y - 1}};
    bool all = true;
    for (int k = 0; k < 4; ++k) all = all && face_present(R, f[k]);
    if (!all) continue;
    int sum = 0;
    for (int k = 0; k < 4; ++k) sum += face_change(R, cov, f[k], f[k + 1]);
    bad += sum != 0;
  }
  return bad;
}

void enumerate_trees(const GridRegion& g, const std::function<void(const SpanningTree&)>& visit) {
  g.validate();
  const int n = g.node_count();
  const bool torus = g.boundary == Boundary::Torus;
  const int free = torus ? n - 1 : n;
  if (free > 12) throw Error("enumerate_trees: region too large for exhaustive enumeration");
  std::uint64_t total = 1ULL << (2 * free);
  SpanningTree t{g, std::vector<std::int8_t>(n, -1)};
  std::vector<int> mark(n, -1);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int k = 0; k < n; ++k) {
      if (torus && k == g.root) continue;
      t.arrow[k] = static_cast<std::int8_t>(c & 3);
      c >>= 2;
    }
    bool ok = true;
    std::fill(mark.begin(), mark.end(), -1);
    for (int i = 0; i < n && ok; ++i) {
      int u = i;
      while (u >= 0 && mark[u] == -1 && !(torus && u == g.root)) {
        mark[u] = i;
        u = g.neighbor(u, kDirs[t.arrow[u]]);
      }
      if (u >= 0 && mark[u] == i) ok = false;
    }
    if (ok) visit(t);
  }
}

std::uint64_t tree_key(const SpanningTree& t) {
  std::uint64_t k = 0;
  for (auto it = t.arrow.rbegin(); it != t.arrow.rend(); ++it) k = 4 * k + (*it < 0 ? 0 : *it);
  return k;
}

Eigen::MatrixX4d arrow_marginals(const GridRegion& g, const DriftedWeights& s) {
  g.validate();
  validate(s);
  const int n = g.node_count();
  if (n > 4096) throw Error("arrow_marginals: region too large for a dense solve");
  double tot = s.s1 + s.s2 + s.s3 + s.s4;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < n; ++k) {
    if (g.boundary == Boundary::Torus && k == g.root) continue;
    for (Direction d : kDirs) {
      int v = g.neighbor(k, d);
      if (v >= 0 && !(g.boundary == Boundary::Torus && v == g.root)) A(k, v) -= step_weight(s, d) / tot;
    }
  }
  Eigen::MatrixXd G = A.partialPivLu().inverse();
  Eigen::MatrixX4d M = Eigen::MatrixX4d::Zero(n, 4);
  for (int k = 0; k < n; ++k) {
    if (g.boundary == Boundary::Torus && k == g.root) continue;
    for (int d = 0; d < 4; ++d) {
      int v = g.neighbor(k, kDirs[d]);
      bool root = v < 0 || (g.boundary == Boundary::Torus && v == g.root);
      M(k, d) = step_weight(s, kDirs[d]) / tot * (G(k, k) - (root ? 0.0 : G(v, k)));
    }
  }
  return M;
}

ChiSquare tree_chi_square(const GridRegion& g, const DriftedWeights& s, std::uint64_t samples, const RngStream& rng) {
  std::map<std::uint64_t, double> prob;
  double Z = 0;
  enumerate_trees(g, [&](const SpanningTree& t) {
    double w = tree_weight(t, s);
    prob[tree_key(t)] = w;
    Z += w;
  });
  std::vector<std::uint64_t> keys(samples);
  parallel_for(samples, [&](std::size_t i) { keys[i] = tree_key(wilson_sample(g, s, rng, i)); });
  std::map<std::uint64_t, std::uint64_t> count;
  for (auto k : keys) {
    if (!prob.count(k)) throw Error("tree_chi_square: sampled a non-tree");
    ++count[k];
  }
  ChiSquare r;
  for (const auto& [k, w] : prob) {
    double e = samples * w / Z, o = static_cast<double>(count[k]);
    r.statistic += (o - e) * (o - e) / e;
  }
  r.dof = static_cast<int>(prob.size()) - 1;
  boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

McEstimate mc_edge_probability(const GridRegion& g, const DriftedWeights& s, const Edge& e, std::uint64_t samples,
                               const RngStream& rng) {
  auto R = temperley_region(g);
  check_edge(e);
  if (!R.contains(e.white) || !R.contains(e.black)) throw Error("mc_edge_probability: edge is outside the region");
  if (samples == 0) throw Error("mc_edge_probability needs at least one sample");
  McEstimate r;
  r.samples = samples;
  auto margin = [&](Vertex v) { return std::min({v.x - 1, 2 * g.width + 1 - v.x, v.y - 1, 2 * g.height + 1 - v.y}); };
  r.near_boundary = std::min(margin(e.white), margin(e.black)) < std::min(g.width, g.height) / 2;
  // edges at a tree node are read off the arrow directly
  int node = -1;
  if (e.black.x % 2 == 0 && e.black.y % 2 == 0) node = (e.black.x / 2 - 1) + g.width * (e.black.y / 2 - 1);
  std::vector<char> hit(samples, 0);
  parallel_for(samples, [&](std::size_t i) {
    auto t = wilson_sample(g, s, rng, i);
    if (node >= 0) {
      hit[i] = step(e.black, kDirs[t.arrow[node]]) == e.white;
    } else {
      for (const auto& d : tree_to_dimers(t).edges)
        if (d == e) hit[i] = 1;
    }
  });
  double k = 0;
  for (char h : hit) k += h;
  r.estimate = k / samples;
  r.std_error = std::sqrt(r.estimate * (1 - r.estimate) / samples);
  return r;
}

McCovariance mc_height_covariance(const GridRegion& g, const DriftedWeights& s, const std::vector<Vertex>& faces,
                                  std::uint64_t samples, const RngStream& rng) {
  auto R = temperley_region(g);
  if (samples < 2) throw Error("mc_height_covariance needs at least two samples");
  const int m = static_cast<int>(faces.size());
  Eigen::MatrixXd H(samples, m);
  parallel_for(samples, [&](std::size_t i) {
    auto hf = dimer_to_height(R, tree_to_dimers(wilson_sample(g, s, rng, i)));
    for (int j = 0; j < m; ++j) H(i, j) = hf.at(faces[j].x, faces[j].y);
  });
  Eigen::RowVectorXd mean = H.colwise().mean();
  Eigen::MatrixXd C = H.rowwise() - mean;
  McCovariance r;
  r.samples = samples;
  r.estimate = C.transpose() * C / static_cast<double>(samples - 1);
  r.std_error.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Eigen::ArrayXd p = C.col(a).array() * C.col(b).array();
      double var = (p - p.mean()).square().sum() / static_cast<double>(samples - 1);
      r.std_error(a, b) = std::sqrt(var / samples);
    }
  return r;
}

UrbanRenewal urban_renewal_weights(double t) {
  if (!(t > 0) || !std::isfinite(t)) throw Error("urban_renewal_weights needs t > 0");
  UrbanRenewal u;
  u.t = t;
  u.s = t * t / 2;
  u.weights = {1, u.s, u.s, 1};
  return u;
}

std::vector<EdgeClassProbability> edge_class_probabilities(const PeriodicModel& m, double tol) {
  FourierOptions opt;
  opt.tol = tol;
  TorusIntegrator integ(m.determinant(), opt);
  auto adj = m.matrix().adjugate();
  std::vector<EdgeClassProbability> out;
  const int n = m.matrix().size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (const auto& [e, c] : m.matrix()(i, j).terms()) {
        if (std::abs(c) == 0) continue;
        auto v = integ.coefficient(adj(j, i), -e.first, -e.second);
        out.push_back({i, j, e.first, e.second, std::abs(c), (c * v.value).real()});
      }
  return out;
}

}  // namespace dimers
