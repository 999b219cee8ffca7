#include <algorithm>
#include <map>
#include <numbers>
#include <random>

#include "dimers/correlations.hpp"
#include "dimers/spectral.hpp"
#include "doctest.h"

using namespace dimers;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::array<double, 4> random_positions(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gap(0.3, 3.0), start(-2, 2);
  std::array<double, 4> x;
  x[0] = start(rng);
  for (int i = 1; i < 4; ++i) x[i] = x[i - 1] + gap(rng);
  return x;
}

// Expands the signed class sum over the six 4-cycles of the 4x4 determinant with Bessel factors
// kept symbolic. Returns coefficient per sorted multiset of (order, gap index), times π⁴.
std::map<std::vector<std::pair<int, int>>, double> expand_four_cycles(double l1, double l2) {
  double L = std::hypot(l1, l2);
  auto gap_of = [](int a, int b) {
    if (a > b) std::swap(a, b);
    static const int g[4][4] = {{-1, 0, 3, 5}, {0, -1, 1, 4}, {3, 1, -1, 2}, {5, 4, 2, -1}};
    return g[a][b];
  };
  // entry(row a white class ca, column b black index cb) = c1 K1 + c0 K0 (times 1/π)
  auto entry = [&](int a, int b, int ca, int cb) {
    int bc = 1 - cb, wc = ca;
    double sgn = b > a ? 1 : -1;
    double c1 = (bc == wc) ? L * sgn : 0;
    double c0 = (bc == 0 && wc == 0) ? l1 : (bc == 1 && wc == 1) ? -l1 : l2;
    return std::pair{c1, c0};
  };
  std::map<std::vector<std::pair<int, int>>, double> out;
  std::array<int, 4> p{0, 1, 2, 3};
  do {
    // four-cycles: a single cycle of length 4
    int len = 1;
    for (int v = p[0]; v != 0; v = p[v]) ++len;
    if (p[0] == 0 || len != 4) continue;
    double sign = -1;  // odd permutation
    for (int mask = 0; mask < 16; ++mask) {
      int c[4] = {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1, (mask >> 3) & 1};
      double cs = ((c[0] + c[1] + c[2] + c[3]) % 2 ? -1 : 1) * sign;
      // expand the product of four binomials
      for (int pick = 0; pick < 16; ++pick) {
        double coef = cs;
        std::vector<std::pair<int, int>> key;
        for (int a = 0; a < 4; ++a) {
          auto [c1, c0] = entry(a, p[a], c[a], c[p[a]]);
          int order = (pick >> a) & 1;
          coef *= order ? c1 : c0;
          key.push_back({order, gap_of(a, p[a])});
        }
        if (coef == 0) continue;
        std::sort(key.begin(), key.end());
        out[key] += coef;
      }
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

TEST_CASE("scaled inverse entries") {
  ScalingParams l{0.6, 0.8};
  for (double x : {-2.0, 0.5, 1.7})
    CHECK(scaled_inv_entry(0, 1, x, 0, l) == doctest::Approx(0.8 * bessel_k(0, std::abs(x)) / kPi).epsilon(1e-14));
  // (K1(1) + K0(1))/π
  CHECK(scaled_inv_entry(0, 0, 1, 0, {1, 0}) == doctest::Approx(0.32560926295427667).epsilon(1e-13));
  CHECK_THROWS_AS(scaled_inv_entry(0, 0, 0, 0, l), Error);
  CHECK_THROWS_AS(scaled_inv_entry(0, 0, 1, 0, {0, 0}), Error);
}

TEST_CASE("scaled inverse entries are the limit of -2/ε times the discrete ones") {
  ScalingParams l{1, 0.5};
  double prev[4] = {1, 1, 1, 1};
  for (int inv : {64, 128}) {
    double eps = 1.0 / inv;
    InverseKasteleyn K(PeriodicModel::flipped({1, 1 - l.lambda1 * eps, 1 - l.lambda2 * eps, 1}), FourierOptions{1e-12});
    double x = 1.0, y = 0.5;
    int X = int(std::floor(x / eps)), Y = int(std::floor(y / eps));
    for (int b = 0; b < 2; ++b)
      for (int w = 0; w < 2; ++w) {
        // domain(b) - domain(w) = (X, Y), so the entry sits at domain(w) - domain(b) = -(X, Y)
        double d = -2 / eps * K.entry(b, w, -X, -Y).value.real();
        double e = rel(d, scaled_inv_entry(b, w, x, y, l));
        CHECK(e < prev[2 * b + w]);
        prev[2 * b + w] = e;
      }
  }
  for (double e : prev) CHECK(e < 0.02);
}

TEST_CASE("two-point integrand") {
  CHECK(s2_integrand(0, 1, {1, 0}) == doctest::Approx(0.98401).epsilon(1e-4));
  CHECK(s2_integrand(0, 1, {1, 0}) == doctest::Approx(0.9840283004049315).epsilon(1e-13));
  CHECK(s2_integrand(0.2, 1.9, {0.6, 0.8}) == doctest::Approx(s2_integrand(0.2, 1.9, {1, 0})).epsilon(1e-14));
  for (double d = 0.05; d < 8; d *= 1.7) CHECK(s2_integrand(0, d, {0.3, 0.2}) > 0);
  CHECK_THROWS_AS(s2_integrand(1, 1, {1, 0}), Error);
}

TEST_CASE("pair density from determinants is minus the two-point integrand") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 2);
  for (int k = 0; k < 20; ++k) {
    ScalingParams l{u(rng), u(rng)};
    double a = u(rng), b = a + u(rng);
    CHECK(pair_density(a, b, l) == doctest::Approx(-s2_integrand(a, b, l)).epsilon(1e-12));
  }
}

TEST_CASE("two-point integral") {
  ScalingParams l{1, 0};
  Interval a{0, 1}, b{2, 3};
  auto v = s2(a, b, l, 1e-12);
  CHECK(v.value == doctest::Approx(s2(b, a, l, 1e-12).value).epsilon(1e-11));
  // shrinking intervals: midpoint limit
  double h = 1e-3;
  auto small = s2({0.5 - h / 2, 0.5 + h / 2}, {2.1 - h / 2, 2.1 + h / 2}, l, 1e-16);
  CHECK(small.value / (h * h) == doctest::Approx(s2_integrand(0.5, 2.1, l)).epsilon(1e-6));
  // Monte Carlo oracle
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  int n = 200000;
  double s = 0, s2sum = 0;
  for (int i = 0; i < n; ++i) {
    double f = s2_integrand(u(rng), 2 + u(rng), l);
    s += f;
    s2sum += f * f;
  }
  double mean = s / n, se = std::sqrt((s2sum / n - mean * mean) / n);
  CHECK(std::abs(mean - v.value) < 3 * se);
  CHECK_THROWS_AS(s2({0, 1}, {0.5, 2}, l), Error);
  CHECK_THROWS_AS(s2({0, 1}, {1, 2}, l), Error);
  CHECK(s2({5, 6}, {7, 8}, l).value == doctest::Approx(s2({0, 1}, {2, 3}, l).value).epsilon(1e-10));
}

TEST_CASE("connected terms come from the four-cycles of the determinant") {
  // generator: symbolic expansion at two λ with equal norm must give ±4|λ|⁴ on exactly the listed terms
  auto gi = [](Gap g) { return static_cast<int>(g); };
  for (auto [l1, l2] : {std::pair{1.0, 0.0}, std::pair{0.6, 0.8}, std::pair{0.3, 1.7}}) {
    double L4 = std::pow(l1 * l1 + l2 * l2, 2);
    auto gen = expand_four_cycles(l1, l2);
    std::map<std::vector<std::pair<int, int>>, double> listed;
    for (const auto& t : connected_terms()) {
      std::vector<std::pair<int, int>> key;
      for (auto [o, g] : t.factors) key.push_back({o, gi(g)});
      std::sort(key.begin(), key.end());
      CHECK(listed.count(key) == 0);
      listed[key] = 4 * L4 * t.sign;
    }
    int nonzero = 0;
    for (const auto& [key, c] : gen) {
      if (std::abs(c) < 1e-12 * L4) continue;
      ++nonzero;
      REQUIRE(listed.count(key) == 1);
      CHECK(c == doctest::Approx(listed[key]).epsilon(1e-12));
    }
    CHECK(nonzero == 24);
  }
}

TEST_CASE("four-point density minus the Wick sum is 3^4 f") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (int k = 0; k < 50; ++k) {
    auto x = random_positions(rng);
    ScalingParams l{u(rng), u(rng)};
    double fp = four_point_density(x, l);
    double diff = fp - wick_pair_sum(x, l);
    double f = f_connected(x[1] - x[0], x[2] - x[1], x[3] - x[2], l);
    CHECK(std::abs(diff - 81 * f) < 1e-10 * std::max(1.0, std::abs(fp)));
  }
}

TEST_CASE("four-point density symmetries") {
  std::mt19937_64 rng(8);
  ScalingParams l{0.7, 0.4};
  for (int k = 0; k < 10; ++k) {
    auto x = random_positions(rng);
    double v = four_point_density(x, l);
    auto y = x;
    std::swap(y[0], y[2]);
    CHECK(four_point_density(y, l) == doctest::Approx(v).epsilon(1e-12));
    std::swap(y[1], y[3]);
    CHECK(four_point_density(y, l) == doctest::Approx(v).epsilon(1e-12));
    std::array<double, 4> t{x[0] + 3.3, x[1] + 3.3, x[2] + 3.3, x[3] + 3.3};
    CHECK(four_point_density(t, l) == doctest::Approx(v).epsilon(1e-10));
  }
  std::array<double, 4> bad{0, 1, 1, 2};
  CHECK_THROWS_AS(four_point_density(bad, l), Error);
}

TEST_CASE("connected part vanishes as lambda goes to zero") {
  std::array<double, 4> x{0, 1, 2.5, 3.2};
  double prev = 1e300;
  for (double s : {1e-1, 1e-2, 1e-3, 1e-4}) {
    ScalingParams l{0.6 * s, 0.8 * s};
    double c = std::abs(four_point_density(x, l) - wick_pair_sum(x, l));
    CHECK(c < prev);
    prev = c;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("f_connected") {
  ScalingParams l{1, 0};
  // regression value; agrees with the determinant expansion checked above
  CHECK(f_connected(1, 1, 1, l) == doctest::Approx(0.00014339696649903942).epsilon(1e-12));
  std::array<double, 4> x{0, 1, 2, 3};
  CHECK((four_point_density(x, l) - wick_pair_sum(x, l)) / 81 ==
        doctest::Approx(f_connected(1, 1, 1, l)).epsilon(1e-11));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 3);
  for (int k = 0; k < 100; ++k) {
    double a = u(rng), b = u(rng), c = u(rng);
    CHECK(f_connected(a, b, c, l) == doctest::Approx(f_connected(c, b, a, l)).epsilon(1e-12));
    double p = u(rng), q = u(rng);
    ScalingParams m{p, q}, n{std::hypot(p, q), 0};
    CHECK(std::abs(f_connected(a, b, c, m) - f_connected(a, b, c, n)) < 1e-13 * std::max(1.0, std::abs(f_connected(a, b, c, n))));
  }
  CHECK_THROWS_AS(f_connected(0, 1, 1, l), Error);
  CHECK_THROWS_AS(f_connected(1, -1, 1, l), Error);
}

TEST_CASE("the term list is closed under reflection") {
  auto reflect = [](Gap g) {
    switch (g) {
      case Gap::Y1: return Gap::Y3;
      case Gap::Y3: return Gap::Y1;
      case Gap::Y12: return Gap::Y23;
      case Gap::Y23: return Gap::Y12;
      default: return g;
    }
  };
  std::map<std::vector<std::pair<int, int>>, int> terms;
  for (const auto& t : connected_terms()) {
    std::vector<std::pair<int, int>> key;
    for (auto [o, g] : t.factors) key.push_back({o, static_cast<int>(g)});
    std::sort(key.begin(), key.end());
    terms[key] = t.sign;
  }
  for (const auto& t : connected_terms()) {
    std::vector<std::pair<int, int>> key;
    for (auto [o, g] : t.factors) key.push_back({o, static_cast<int>(reflect(g))});
    std::sort(key.begin(), key.end());
    REQUIRE(terms.count(key) == 1);
    CHECK(terms[key] == t.sign);
  }
}

TEST_CASE("decay of f towards the Gaussian limit") {
  // leading order 4|λ|⁴/π⁴ times Bessel products with two 1/(|λ|y) poles: |λ|² log(1/|λ|)
  double prev = 1e300, prev_slope = 0;
  std::vector<double> ls{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> fs;
  for (double L : ls) {
    double f = std::abs(f_connected(1, 1, 1, {L, 0}));
    CHECK(f < prev);
    prev = f;
    fs.push_back(f);
  }
  for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
    double slope = std::log(fs[i] / fs[i + 1]) / std::log(ls[i] / ls[i + 1]);
    double model = std::log((ls[i] * ls[i] * std::log(1 / ls[i])) / (ls[i + 1] * ls[i + 1] * std::log(1 / ls[i + 1]))) /
                   std::log(ls[i] / ls[i + 1]);
    CHECK(std::abs(slope - model) < 0.5);
    CHECK(slope > prev_slope);
    prev_slope = slope;
  }
}

TEST_CASE("Wick defect for touching unit intervals is certified") {
  CorrelationSpec spec{{{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {1, 0}, 1e-7};
  auto r = wick_defect(spec);
  CHECK(r.certified);
  CHECK(std::abs(r.defect) > 3 * r.error_estimate);
  CHECK(r.defect == doctest::Approx(81 * r.integral_f));
  // regression constant from the graded quadrature
  CHECK(r.defect == doctest::Approx(0.017807453787400295).epsilon(1e-6));
  CHECK_FALSE(r.s4.has_value());
  CHECK_FALSE(r.wick.has_value());
  // orientation and order of the input do not matter
  CorrelationSpec shuffled{{{2, 3}, {0, 1}, {3, 4}, {1, 2}}, {0.6, 0.8}, 1e-7};
  CHECK(wick_defect(shuffled).defect == doctest::Approx(r.defect).epsilon(1e-6));
  auto q = wick_defect_qmc(spec, 4000, 8, 3);
  CHECK(std::abs(81 * q.first - r.defect) < 3 * 81 * q.second + 1e-6);
}

TEST_CASE("Wick defect for the small-interval configuration is positive") {
  CorrelationSpec spec{small_interval_configuration(4), {1, 0}, 1e-15};
  auto r = wick_defect(spec);
  CHECK(r.defect > 0);
  CHECK(r.certified);
  CHECK(r.defect == doctest::Approx(2.155235889952522e-07).epsilon(1e-8));
  auto q = wick_defect_qmc(spec, 4000, 8, 5);
  CHECK(std::abs(81 * q.first - r.defect) < 4 * 81 * q.second);
  double vol = std::pow(std::ldexp(1.0, -4), 4);
  CHECK(r.integral_f / vol == doctest::Approx(f_connected(1, 1, 1, {1, 0})).epsilon(0.05));
}

TEST_CASE("Wick defect for separated intervals") {
  CorrelationSpec spec{{{0, 0.8}, {1, 1.9}, {2.3, 3}, {3.2, 4}}, {1, 0}, 1e-9};
  auto r = wick_defect(spec);
  REQUIRE(r.s4.has_value());
  CHECK(*r.s4 - *r.wick == doctest::Approx(r.defect).epsilon(1e-12));
  auto q = wick_defect_qmc(spec, 4000, 8, 7);
  CHECK(std::abs(81 * q.first - r.defect) < 4 * 81 * q.second);
  CorrelationSpec moved = spec;
  for (auto& g : moved.intervals) {
    g.a += 10;
    g.b += 10;
  }
  CHECK(wick_defect(moved).defect == doctest::Approx(r.defect).epsilon(1e-8));
  CorrelationSpec far{{{0, 1}, {15, 16}, {30, 31}, {45, 46}}, {1, 0}, 1e-12};
  CHECK(std::abs(wick_defect(far).defect) < 1e-20);
}

TEST_CASE("Wick defect input validation") {
  CHECK_THROWS_AS(wick_defect({{{0, 1}, {0.5, 2}, {2, 3}, {3, 4}}, {1, 0}, 1e-6}), Error);
  CHECK_THROWS_AS(wick_defect({{{0, 1}, {1, 2}, {2, 3}}, {1, 0}, 1e-6}), Error);
  CHECK_THROWS_AS(wick_defect({{{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {0, 0}, 1e-6}), Error);
  CHECK_THROWS_AS(wick_defect({{{1, 0}, {1, 2}, {2, 3}, {3, 4}}, {1, 0}, 1e-6}), Error);
}

TEST_CASE("positivity bounds") {
  ScalingParams l{1, 0};
  auto b = positivity_bounds(1, 24, l);
  CHECK(b.g_plus_lower > 0);
  CHECK(b.g_minus_upper > 0);
  CHECK(b.gap() > 0);
  // bounds bracket the actual groups inside the configuration
  double c = (std::ldexp(1.0, 24) - 2) / (std::ldexp(1.0, 24) + 2);
  double y1 = 0.5 * (1 + c);
  CHECK(f_positive_part(y1, 1, y1, l) > b.g_plus_lower);
  CHECK(f_negative_part(y1, 1, y1, l) < b.g_minus_upper);
  CHECK(f_positive_part(1, 1, 1, l) - f_negative_part(1, 1, 1, l) ==
        doctest::Approx(f_connected(1, 1, 1, l) * std::pow(kPi, 4) / 4));
}
