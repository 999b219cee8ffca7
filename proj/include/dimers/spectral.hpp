#pragma once

#include <Eigen/Dense>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "dimers/lattice.hpp"
#include "dimers/laurent.hpp"
#include "dimers/quadrature.hpp"

namespace dimers {

using Matrix2c = Eigen::Matrix2cd;

// The matrices as printed: rows (w0, w1), columns (b0, b1).
Matrix2c kf_matrix(const FlippedWeights& r, cplx z, cplx w);
Matrix2c kd_matrix(const DriftedWeights& s, cplx z, cplx w);

// The printed characteristic polynomials, in their printed variables.
cplx charpoly_flipped(const FlippedWeights& r, cplx z, cplx w);
cplx charpoly_drifted(const DriftedWeights& s, cplx z, cplx w);
cplx charpoly_square_octagon(double t, cplx z, cplx w);

enum class ModelKind { Flipped, Drifted, SquareOctagon };
const char* to_string(ModelKind k);

struct CharPoly {
  ModelKind kind = ModelKind::Flipped;
  std::vector<double> weights;  // (r1..r4), (s1..s4) or (t)

  cplx operator()(cplx z, cplx w) const;
  Laurent2 laurent() const;
};

// Square matrix of Laurent polynomials; rows are white classes, columns black classes.
class FundamentalMatrix {
 public:
  explicit FundamentalMatrix(int n) : n_(n), e_(static_cast<std::size_t>(n) * n) {}
  int size() const { return n_; }
  Laurent2& operator()(int i, int j) { return e_[static_cast<std::size_t>(i) * n_ + j]; }
  const Laurent2& operator()(int i, int j) const { return e_[static_cast<std::size_t>(i) * n_ + j]; }
  Eigen::MatrixXcd evaluate(cplx z, cplx w) const;
  Laurent2 determinant() const;
  // adj(K)(j,i) = cofactor (i,j); K^{-1} = adj / det
  FundamentalMatrix adjugate() const;

 private:
  int n_;
  std::vector<Laurent2> e_;
};

// Fourier transform of a 2x2-periodic square-grid weighting: entry (w_i, b_j) collects
// sign·weight·z^dx·w^dy over edges from w_i in domain (0,0) to b_j in domain (dx, dy).
template <class WeightFn>
FundamentalMatrix fourier_from_pattern(WeightFn weight) {
  FundamentalMatrix K(2);
  for (VertexClass wc : {VertexClass::W0, VertexClass::W1}) {
    Vertex w = vertex_in_domain(wc, {0, 0});
    for (Direction d : {Direction::N, Direction::E, Direction::S, Direction::W}) {
      Vertex b = step(w, d);
      Edge e{w, b};
      DomainIndex D = domain_of(b);
      K(class_index(wc), class_index(classify_vertex(b))) +=
          Laurent2::monomial(kasteleyn_sign(e) * weight(e), D.x, D.y);
    }
  }
  return K;
}

class PeriodicModel {
 public:
  static PeriodicModel flipped(const FlippedWeights& r);
  static PeriodicModel drifted(const DriftedWeights& s);
  static PeriodicModel square_octagon(double t);

  ModelKind kind() const { return kind_; }
  const FundamentalMatrix& matrix() const { return K_; }
  const Laurent2& determinant() const { return det_; }
  bool on_square_grid() const { return kind_ != ModelKind::SquareOctagon; }
  double edge_weight(const Edge& e) const;
  // K(w, b): Kasteleyn sign times weight
  double kasteleyn_entry(const Edge& e) const;
  const std::vector<double>& weights() const { return weights_; }

 private:
  PeriodicModel(ModelKind k, std::vector<double> wts, FundamentalMatrix K);
  ModelKind kind_;
  std::vector<double> weights_;
  FundamentalMatrix K_;
  Laurent2 det_;
};

struct FourierOptions {
  double tol = 1e-10;  // absolute
  int scan = 2048;     // θ samples for locating near-singular circles
  int max_panels = 20000;
};

// Torus integrals against a fixed denominator. The inner circle is integrated in closed
// form from the two roots of the denominator; the outer integral is adaptive Gauss-Kronrod
// with breakpoints where a root approaches the unit circle.
class TorusIntegrator {
 public:
  explicit TorusIntegrator(const Laurent2& den, FourierOptions opt = {});

  // coefficient of z^m w^n in the torus Laurent expansion of num/den
  QuadResult<cplx> coefficient(const Laurent2& num, int m, int n) const;
  // (1/4π²)∬ log|den|
  QuadResult<double> mean_log_abs() const;
  const FourierOptions& options() const { return opt_; }

 private:
  struct Orientation {
    QuadLaurent den;   // inner variable is the second argument
    std::vector<double> breaks;
  };
  static Orientation orient(const QuadLaurent& den, int scan);
  FourierOptions opt_;
  Orientation inner_w_;
  Orientation inner_z_;
};

struct FreeEnergy {
  double value = 0;
  double error_estimate = 0;
};

FreeEnergy free_energy(const CharPoly& P, double tol = 1e-10);
FreeEnergy free_energy(const Laurent2& P, double tol = 1e-10);
// (1/n²) Σ log|P| over the n-th roots of unity grid
double free_energy_root_of_unity(const Laurent2& P, int n, double shift = 0.5);

struct InverseEntry {
  cplx value;
  double error = 0;
  int black_class = 0;
  int white_class = 0;
  int x = 0;
  int y = 0;
};

// K^{-1}(b_j, w_i + (x,y)) for a periodic model, memoized and safe to share between threads.
class InverseKasteleyn {
 public:
  explicit InverseKasteleyn(const PeriodicModel& model, FourierOptions opt = {});
  InverseEntry entry(int black_class, int white_class, int x, int y) const;
  // real-space K^{-1}(b, w) on the square grid
  double at(Vertex b, Vertex w) const;
  const PeriodicModel& model() const { return model_; }

 private:
  PeriodicModel model_;
  FundamentalMatrix adj_;
  TorusIntegrator integ_;
  mutable std::mutex mu_;
  mutable std::map<std::tuple<int, int, int, int>, InverseEntry> cache_;
};

InverseEntry inv_kasteleyn(const PeriodicModel& model, int black_class, int white_class, int x, int y,
                           double tol = 1e-10);

// Probability that all edges are covered; edges must be pairwise vertex-disjoint.
double local_stats(std::span<const Edge> edges, const InverseKasteleyn& inv);

void check_vertex_disjoint(std::span<const Edge> edges);

}  // namespace dimers
