#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "dimers/greens.hpp"

namespace dimers {

// Scaling-window limit of K^{-1}(b, w)/ε at displacement (x, y) = b - w.
double scaled_inv_entry(int black_class, int white_class, double x, double y, const ScalingParams& lambda);

double s2_integrand(double v1, double v2, const ScalingParams& lambda);

struct Interval {
  double a = 0;
  double b = 0;
  double length() const { return b - a; }
};

// throws unless the closed intervals are disjoint
QuadResult<double> s2(const Interval& gi, const Interval& gj, const ScalingParams& lambda, double tol = 1e-10);

// Height-change pair density from the 2x2 determinants, 3² Σ (-1)^{i+j} det(...).
double pair_density(double v1, double v2, const ScalingParams& lambda);
// 3⁴ Σ (-1)^{i+j+k+l} det of the 4x4 matrix with zero diagonal.
double four_point_density(std::span<const double, 4> x, const ScalingParams& lambda);
// Σ over the three pairings of products of pair densities
double wick_pair_sum(std::span<const double, 4> x, const ScalingParams& lambda);

enum class Gap { Y1, Y2, Y3, Y12, Y23, Y123 };

struct ConnectedTerm {
  int sign;
  std::array<std::pair<int, Gap>, 4> factors;  // (Bessel order, argument gap)
};

// The 24 four-cycle terms, each multiplied by 4|λ|⁴/π⁴.
const std::array<ConnectedTerm, 24>& connected_terms();

double f_connected(double y1, double y2, double y3, const ScalingParams& lambda);

struct CorrelationSpec {
  std::vector<Interval> intervals;
  ScalingParams lambda;
  double tol = 1e-8;
};

struct WickReport {
  double integral_f = 0;          // ∫ f over γ1×…×γ4
  double defect = 0;              // S4 - Wick = 3⁴ ∫ f
  double error_estimate = 0;      // for defect
  std::optional<double> s4;       // only when the closed intervals are disjoint
  std::optional<double> wick;     // Σ over pairings of S2·S2
  bool certified = false;         // |defect| > 3 error_estimate
  int nodes_per_interval = 0;
  long evaluations = 0;
};

// Intervals must be open-disjoint; touching endpoints are allowed.
WickReport wick_defect(const CorrelationSpec& spec);

// Randomly shifted lattice-rule estimate of ∫ f over the box, returning (mean, standard error).
std::pair<double, double> wick_defect_qmc(const CorrelationSpec& spec, int points, int shifts, std::uint64_t seed);

struct PositivityBounds {
  double g_plus_lower = 0;   // g+(y2, y2, y2)
  double g_minus_upper = 0;  // g-(c y2, y2, c y2), c = (2^n - 2)/(2^n + 2)
  double gap() const { return g_plus_lower - g_minus_upper; }
};

// Positive and negative term groups of f, each without the 4|λ|⁴/π⁴ prefactor.
double f_positive_part(double y1, double y2, double y3, const ScalingParams& lambda);
double f_negative_part(double y1, double y2, double y3, const ScalingParams& lambda);
PositivityBounds positivity_bounds(double y2, int n, const ScalingParams& lambda);

// configuration with γ1 = (0, 2^-n), γ2 = (1 - 2^-n, 1), γ3 = (2, 2 + 2^-n), γ4 = (3 - 2^-n, 3)
std::vector<Interval> small_interval_configuration(int n);

void check_disjoint(std::span<const Interval> iv, bool allow_touching);

}  // namespace dimers
