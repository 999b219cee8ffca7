#pragma once

#include <span>
#include <string>
#include <vector>

#include "dimers/lattice.hpp"
#include "dimers/spectral.hpp"

namespace dimers {

struct GaugeFactors {
  double alpha = 1;  // r4 / r2
  double beta = 1;   // r3 / r1
  Eigen::Matrix2d D1 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d D2 = Eigen::Matrix2d::Identity();
  static GaugeFactors from(const FlippedWeights& r);
};

// max |K_d(s, z, w) - D1 K_f(r, αz, βw) D2| with s = to_drifted(r)
double matrix_relation_residual(const FlippedWeights& r, cplx z, cplx w);
// the same with the flipped matrix evaluated at (z, w) unscaled
double matrix_relation_residual_unscaled(const FlippedWeights& r, cplx z, cplx w);

// K_f^{-1}(b, w) / K_d^{-1}(b, w) where (x, y) = domain(b) - domain(w)
double inv_entry_ratio(int black_class, int white_class, int x, int y, const FlippedWeights& r);

struct EquivalenceReport {
  std::vector<Edge> edges;
  double p_flipped = 0;
  double p_drifted = 0;
  double difference = 0;
  double tol = 0;
  bool ok = false;
  std::string describe() const;
};

class EquivalenceFailure : public Error {
 public:
  explicit EquivalenceFailure(EquivalenceReport r) : Error(r.describe()), report(std::move(r)) {}
  EquivalenceReport report;
};

// Compares local_stats under μ_f(r) and μ_d(to_drifted(r)).
EquivalenceReport compare_measures(std::span<const Edge> edges, const InverseKasteleyn& flipped,
                                   const InverseKasteleyn& drifted, double tol);
// throws EquivalenceFailure when the probabilities differ by tol or more
EquivalenceReport check_measure_equiv(std::span<const Edge> edges, const FlippedWeights& r, double tol,
                                      double quad_tol = 1e-11);

// All pairwise vertex-disjoint edge sets of size 1..max_size inside [x0, x0+w) × [y0, y0+h).
std::vector<std::vector<Edge>> disjoint_edge_sets(int x0, int y0, int w, int h, int max_size);

}  // namespace dimers
