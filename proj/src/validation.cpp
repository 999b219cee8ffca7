#include "dimers/validation.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "dimers/amoeba.hpp"
#include "dimers/correlations.hpp"
#include "dimers/equivalence.hpp"
#include "dimers/greens.hpp"
#include "dimers/parallel.hpp"
#include "dimers/sampler.hpp"
#include "dimers/spectral.hpp"

namespace dimers {

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string sci(double x, int digits = 3) {
  std::ostringstream o;
  o << std::setprecision(digits) << x;
  return o.str();
}

struct Outcome {
  bool passed;
  std::string detail;
};

Outcome measure_equivalence(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  auto sets = disjoint_edge_sets(0, 0, 4, 4, 3);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    FlippedWeights r{u(rng), u(rng), u(rng), u(rng)};
    FourierOptions fo{1e-9};
    InverseKasteleyn f(PeriodicModel::flipped(r), fo), d(PeriodicModel::drifted(to_drifted(r)), fo);
    std::vector<double> diff(sets.size());
    parallel_for(sets.size(), [&](std::size_t i) { diff[i] = compare_measures(sets[i], f, d, 1e-7).difference; });
    for (double x : diff) worst = std::max(worst, x);
  }
  return {worst < 1e-7, "20 weight vectors x " + std::to_string(sets.size()) + " edge sets, max |p_f - p_d| = " +
                            sci(worst) + " (< 1e-7)"};
}

Outcome matrix_relation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0), ph(-std::numbers::pi, std::numbers::pi);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    FlippedWeights r{u(rng), u(rng), u(rng), u(rng)};
    for (int k = 0; k < 1000; ++k)
      worst = std::max(worst, matrix_relation_residual(r, std::polar(1.0, ph(rng)), std::polar(1.0, ph(rng))));
  }
  return {worst < 1e-12, "20 x 1000 torus points, max residual = " + sci(worst) + " (< 1e-12)"};
}

Outcome uniform_edges() {
  InverseKasteleyn inv(PeriodicModel::flipped({}), FourierOptions{1e-12});
  double worst = 0;
  for (Vertex b : {Vertex{0, 0}, Vertex{1, 1}})
    for (auto d : {Direction::N, Direction::E, Direction::S, Direction::W}) {
      Edge e{step(b, d), b};
      worst = std::max(worst, std::abs(local_stats(std::span<const Edge>(&e, 1), inv) - 0.25));
    }
  return {worst < 1e-8, "8 edge classes, max |p - 1/4| = " + sci(worst) + " (< 1e-8)"};
}

const std::vector<std::pair<double, double>> kGreenPoints = {{2, 0}, {0, 3}, {2.5, 2.5}, {-4, 1.5}, {6, 0}, {1, -4}};

Outcome green_limits() {
  double worst = 0;
  bool decreasing = true;
  for (ScalingParams p : {ScalingParams{1, 0}, ScalingParams{1, 1}}) {
    std::vector<double> prev(kGreenPoints.size(), 1e300);
    for (int inv : {64, 128, 256}) {
      double eps = 1.0 / inv;
      auto H = DiscreteGreen::massive({1, 1 - p.lambda1 * eps, 1 - p.lambda2 * eps, 1}, 1e-12);
      std::vector<double> err(kGreenPoints.size());
      parallel_for(kGreenPoints.size(), [&](std::size_t i) {
        auto [x, y] = kGreenPoints[i];
        double h = 2 * H(int(std::floor(x / eps)), int(std::floor(y / eps))).value;
        err[i] = rel(h, green_massive(x, y, p));
      });
      for (std::size_t i = 0; i < err.size(); ++i) {
        decreasing = decreasing && err[i] < prev[i];
        prev[i] = err[i];
      }
    }
    for (double e : prev) worst = std::max(worst, e);
  }
  return {worst < 0.02 && decreasing, "lambda (1,0), (1,1); 6 points; max rel. error at eps=1/256 = " + sci(worst) +
                                          " (< 0.02), decreasing: " + (decreasing ? "yes" : "no")};
}

const std::vector<std::pair<double, double>> kInvPoints = {{1, 0}, {0, -1.5}, {1, 0.5}, {-2, 1}, {2.5, 2.5}, {0, 4}};

Outcome scaled_inverse() {
  double worst = 0;
  bool decreasing = true;
  for (ScalingParams p : {ScalingParams{1, 0}, ScalingParams{1, 1}}) {
    std::vector<double> prev(4 * kInvPoints.size(), 1e300);
    for (int inv : {64, 128, 256}) {
      double eps = 1.0 / inv;
      InverseKasteleyn K(PeriodicModel::flipped({1, 1 - p.lambda1 * eps, 1 - p.lambda2 * eps, 1}), FourierOptions{1e-12});
      std::vector<double> err(prev.size());
      parallel_for(prev.size(), [&](std::size_t i) {
        auto [x, y] = kInvPoints[i / 4];
        int b = static_cast<int>(i % 4) / 2, w = static_cast<int>(i % 2);
        int X = int(std::floor(x / eps)), Y = int(std::floor(y / eps));
        double d = -2 / eps * K.entry(b, w, -X, -Y).value.real();
        double scale = 0;
        for (int c = 0; c < 4; ++c) scale = std::max(scale, std::abs(scaled_inv_entry(c / 2, c % 2, x, y, p)));
        double l = scaled_inv_entry(b, w, x, y, p);
        // entries whose limit vanishes are measured against the point's largest entry
        err[i] = std::abs(d - l) / (std::abs(l) > 1e-12 * scale ? std::abs(l) : scale);
      });
      for (std::size_t i = 0; i < err.size(); ++i) {
        decreasing = decreasing && err[i] < prev[i];
        prev[i] = err[i];
      }
    }
    for (double e : prev) worst = std::max(worst, e);
  }
  return {worst < 0.03, "4 class pairs x 6 points x 2 lambdas; max rel. error at eps=1/256 = " + sci(worst) +
                            " (< 0.03), decreasing: " + (decreasing ? "yes" : "no")};
}

Outcome wick_consistency(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap(0.3, 3.0), start(-2, 2), u(0.2, 1.5);
  double worst = 0, scale = 0;
  for (int k = 0; k < 50; ++k) {
    std::array<double, 4> x;
    x[0] = start(rng);
    for (int i = 1; i < 4; ++i) x[i] = x[i - 1] + gap(rng);
    ScalingParams l{u(rng), u(rng)};
    double fp = four_point_density(x, l);
    double f = f_connected(x[1] - x[0], x[2] - x[1], x[3] - x[2], l);
    worst = std::max(worst, std::abs(fp - wick_pair_sum(x, l) - 81 * f));
    scale = std::max(scale, std::abs(fp));
  }
  return {worst < 1e-10, "50 configurations, max |S4 - Wick - 81 f| = " + sci(worst) + " (< 1e-10; max |S4| = " +
                             sci(scale) + ")"};
}

Outcome wick_certificate() {
  auto a = wick_defect({{{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {1, 0}, 1e-7});
  auto b = wick_defect({small_interval_configuration(4), {1, 0}, 1e-15});
  bool ok = a.defect != 0 && std::abs(a.defect) > 3 * a.error_estimate && b.defect > 0 &&
            b.defect > 3 * b.error_estimate;
  return {ok, "unit intervals: defect " + sci(a.defect, 10) + " +- " + sci(a.error_estimate) +
                  "; n=4 configuration: defect " + sci(b.defect, 10) + " +- " + sci(b.error_estimate)};
}

Outcome gaussian_decay() {
  std::vector<double> ls{1e-1, 1e-2, 1e-3}, fs;
  for (double L : ls) fs.push_back(std::abs(f_connected(1, 1, 1, {L, 0})));
  bool mono = fs[0] > fs[1] && fs[1] > fs[2] && fs[2] > 0;
  double worst = 0;
  std::ostringstream o;
  o << "|f| = " << sci(fs[0]) << ", " << sci(fs[1]) << ", " << sci(fs[2]) << "; slopes";
  for (int i = 0; i < 2; ++i) {
    double slope = std::log(fs[i] / fs[i + 1]) / std::log(ls[i] / ls[i + 1]);
    // |λ|² log(1/|λ|) leading order
    double model = std::log(ls[i] * ls[i] * std::log(1 / ls[i]) / (ls[i + 1] * ls[i + 1] * std::log(1 / ls[i + 1]))) /
                   std::log(ls[i] / ls[i + 1]);
    worst = std::max(worst, std::abs(slope - model));
    o << " " << sci(slope) << " (model " << sci(model) << ")";
  }
  o << "; max deviation " << sci(worst) << " (< 0.5)";
  return {mono && worst < 0.5, o.str()};
}

Outcome amoeba_intercepts() {
  const std::vector<std::tuple<double, double, double>> cases = {
      {1, 1, 1e-2},    {0.6, 0.8, 1e-2}, {1, 0, 5e-3},   {0, 1, 5e-3},   {2, -1, 1e-3},
      {-1, 0.5, 1e-3}, {0.3, 0.3, 1e-2}, {1.5, 2, 2e-3}, {-2, -2, 1e-3}, {1, 1, 1e-4},
  };
  double bis = 0;
  for (auto [l1, l2, e] : cases) {
    auto L = CharPoly{ModelKind::Flipped, {1, 1 - l1 * e, 1 - l2 * e, 1}}.laurent();
    auto I = intercepts(l1, l2, e);
    double R = 4 * e * std::hypot(l1, l2);
    bis = std::max(bis, std::abs(bisect_boundary(L, {0, 0}, {R, 0}, 1e-13) - I.u_star));
    bis = std::max(bis, std::abs(bisect_boundary(L, {0, 0}, {0, R}, 1e-13) - I.v_star));
  }
  double lim = 0;
  for (auto [l1, l2] : {std::pair{1.0, 1.0}, std::pair{0.6, 0.8}, std::pair{-1.0, 2.0}}) {
    auto I = intercepts(l1, l2, 1e-4);
    double L = std::hypot(l1, l2);
    lim = std::max({lim, rel(I.u_star / 1e-4, L), rel(I.v_star / 1e-4, L)});
  }
  double haus = 0;
  for (auto [l1, l2] : {std::pair{1.0, 1.0}, std::pair{0.6, 0.8}}) {
    double e = 1e-3, L = std::hypot(l1, l2);
    auto P = CharPoly{ModelKind::Flipped, {1, 1 - l1 * e, 1 - l2 * e, 1}}.laurent();
    auto b = hole_boundary(P, {0, 0}, 48, 3 * L * e, 1e-12);
    for (auto& p : b) p = {p.u / e, p.v / e};
    haus = std::max(haus, hausdorff_to_circle(b, {0, 0}, L));
  }
  return {bis < 1e-8 && lim < 0.01 && haus < 0.02, "bisection max error " + sci(bis) + " (< 1e-8); rel. error at eps=1e-4 " +
                                                       sci(lim) + " (< 0.01); Hausdorff at eps=1e-3 " + sci(haus) +
                                                       " (< 0.02)"};
}

Outcome sampler_exactness(std::uint64_t seed) {
  GridRegion small{2, 2};
  auto cu = tree_chi_square(small, {1, 1, 1, 1}, 100000, {seed, 101});
  auto cd = tree_chi_square(small, {1, 1, 2, 2}, 100000, {seed, 102});
  GridRegion big{64, 64};
  Vertex c{64, 64};
  double worst_z = 0;
  bool mc_ok = true;
  std::ostringstream o;
  o << "chi-square p = " << sci(cu.p_value) << " (uniform), " << sci(cd.p_value) << " (1,1,2,2)";
  struct Case {
    DriftedWeights s;
    Direction d;
  };
  auto sd = to_drifted({1, 0.95, 0.95, 1});
  std::vector<Case> cases = {{{1, 1, 1, 1}, Direction::E}, {sd, Direction::N}, {sd, Direction::E}, {sd, Direction::S},
                             {sd, Direction::W}};
  InverseKasteleyn iu(PeriodicModel::drifted({1, 1, 1, 1})), id(PeriodicModel::drifted(sd));
  std::uint64_t stream = 200;
  for (const auto& k : cases) {
    Edge e{step(c, k.d), c};
    double exact = local_stats(std::span<const Edge>(&e, 1), k.s.s1 == 1 && k.s.s2 == 1 ? iu : id);
    auto m = mc_edge_probability(big, k.s, e, 10000, {seed, stream++});
    double dev = std::abs(m.estimate - exact);
    mc_ok = mc_ok && dev < 3 * m.std_error + 0.005 && !m.near_boundary;
    worst_z = std::max(worst_z, (dev - 0.005) / m.std_error);
  }
  o << "; 64x64 center edges (5 cases, 1e4 samples): max (|dev| - 0.005)/sigma = " << sci(worst_z) << " (< 3)";
  return {cu.p_value > 0.01 && cd.p_value > 0.01 && mc_ok, o.str()};
}

Outcome height_invariants(std::uint64_t seed) {
  GridRegion g{16, 16};
  auto R = temperley_region(g);
  std::vector<int> bad(1000, 0);
  parallel_for(bad.size(), [&](std::size_t i) {
    DriftedWeights s = i % 2 ? DriftedWeights{1, 1, 1, 1} : to_drifted({1, 0.8, 0.9, 1});
    auto d = tree_to_dimers(wilson_sample(g, s, RngStream{seed, 300}, i));
    bad[i] = height_loop_defects(R, d);
  });
  long total = 0, configs = 0;
  for (int b : bad) total += b, configs += b != 0;
  return {total == 0, "1000 configurations on 16x16, elementary loops with nonzero sum: " + std::to_string(total) +
                          " (in " + std::to_string(configs) + " configurations)"};
}

Outcome square_octagon_phases() {
  auto g = classify_phase(CharPoly{ModelKind::SquareOctagon, {1.0}}, {0, 0});
  auto l = classify_phase(CharPoly{ModelKind::SquareOctagon, {std::sqrt(2.0)}}, {0, 0});
  return {g == PhaseLabel::Gaseous && l == PhaseLabel::Liquid,
          std::string("t=1: ") + to_string(g) + " (gaseous), t=sqrt2: " + to_string(l) + " (liquid)"};
}

}  // namespace

const char* criterion_name(int id) {
  static const char* names[] = {"",
                                "measure equivalence",
                                "matrix relation",
                                "uniform edge probability",
                                "Green's function limits",
                                "scaled inverse entries",
                                "Wick consistency",
                                "Wick defect certificate",
                                "decay to Gaussianity",
                                "amoeba intercepts",
                                "sampler exactness",
                                "height invariants",
                                "square-octagon phases"};
  if (id < 1 || id > kCriteria) throw Error("unknown acceptance criterion " + std::to_string(id));
  return names[id];
}

CriterionResult run_criterion(int id, const ValidationOptions& opt) {
  CriterionResult r;
  r.id = id;
  r.name = criterion_name(id);
  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t seed = opt.seed * 1000 + static_cast<std::uint64_t>(id);
  try {
    Outcome o{false, ""};
    switch (id) {
      case 1: o = measure_equivalence(seed); break;
      case 2: o = matrix_relation(seed); break;
      case 3: o = uniform_edges(); break;
      case 4: o = green_limits(); break;
      case 5: o = scaled_inverse(); break;
      case 6: o = wick_consistency(seed); break;
      case 7: o = wick_certificate(); break;
      case 8: o = gaussian_decay(); break;
      case 9: o = amoeba_intercepts(); break;
      case 10: o = sampler_exactness(seed); break;
      case 11: o = height_invariants(seed); break;
      case 12: o = square_octagon_phases(); break;
    }
    r.passed = o.passed;
    r.detail = o.detail;
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const ValidationOptions& opt,
                                            const std::function<void(const CriterionResult&)>& report) {
  std::vector<int> todo = ids;
  if (todo.empty())
    for (int i = 1; i <= kCriteria; ++i) todo.push_back(i);
  std::vector<CriterionResult> out;
  for (int id : todo) {
    out.push_back(run_criterion(id, opt));
    if (report) report(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream o;
  o << (r.passed ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << r.name << ": " << r.detail << "  ["
    << std::fixed << std::setprecision(1) << r.seconds << " s]";
  return o.str();
}

}  // namespace dimers
