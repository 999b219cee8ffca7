#include "dimers/quadrature.hpp"

#include <numbers>

namespace dimers {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error("Gauss-Legendre rule needs at least one node");
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1);
    double w = 2 / ((1 - x * x) * dp * dp);
    g.x[i] = -x;
    g.x[n - 1 - i] = x;
    g.w[i] = g.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.x[n / 2] = 0;
  return g;
}

GaussRule graded_rule(double a, double b, int nodes_per_panel, int levels, double ratio, bool grade_left,
                      bool grade_right, int uniform_panels) {
  if (!(b > a)) throw Error("graded rule needs a < b");
  // breakpoints on [0,1]
  std::vector<double> cuts{0.0, 1.0};
  auto grade = [&](bool left) {
    double h = 0.5;
    for (int l = 0; l < levels; ++l) {
      h *= ratio;
      cuts.push_back(left ? h : 1 - h);
    }
  };
  if (grade_left) grade(true);
  if (grade_right) grade(false);
  for (int k = 1; k < uniform_panels; ++k) cuts.push_back(static_cast<double>(k) / uniform_panels);
  if (grade_left || grade_right) cuts.push_back(0.5);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto base = gauss_legendre(nodes_per_panel);
  GaussRule r;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double lo = a + (b - a) * cuts[k], hi = a + (b - a) * cuts[k + 1];
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (int i = 0; i < nodes_per_panel; ++i) {
      r.x.push_back(c + h * base.x[i]);
      r.w.push_back(h * base.w[i]);
    }
  }
  return r;
}

}  // namespace dimers
