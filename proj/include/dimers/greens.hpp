#pragma once

#include <functional>

#include "dimers/lattice.hpp"
#include "dimers/laurent.hpp"
#include "dimers/quadrature.hpp"
#include "dimers/spectral.hpp"

namespace dimers {

struct ScalingParams {
  double lambda1 = 0;
  double lambda2 = 0;
  double eps = 0;
  double norm() const;
};

// K_n(x) for n in {0, 1}, x > 0
double bessel_k(int n, double x);

namespace detail {
// the two branches, exposed for the overlap test
double bessel_k_series(int n, double x);
double bessel_k_continued_fraction(int n, double x);
}  // namespace detail

using GridFunction = std::function<double(Vertex)>;

// Five-point stencils with e1 = (2,0), e2 = (0,2).
double massive_apply(const GridFunction& f, Vertex v, const FlippedWeights& r);
double drifted_apply(const GridFunction& f, Vertex v, const DriftedWeights& s);

// Symbols: the stencil acting on z^X w^Y, with (X, Y) the cell coordinates (v / 2).
Laurent2 massive_symbol(const FlippedWeights& r);
Laurent2 drifted_symbol(const DriftedWeights& s);

double green_massive(double x, double y, const ScalingParams& p);
double green_drifted(double x, double y, const ScalingParams& p);
// K0 at (1/2)|λ|·sqrt(x²k1² + y²k2²), normalised by 1/π
double green_anisotropic(double x, double y, const ScalingParams& p, double k1, double k2);
// limit of twice the discrete Green's function for r = (k2, k1 - λ2ε, k2 - λ1ε, k1)
double green_anisotropic_limit(double x, double y, const ScalingParams& p, double k1, double k2);

// H(X, Y) with L H = -δ0, as a Fourier coefficient over the torus.
QuadResult<double> discrete_green_massive(int x, int y, const FlippedWeights& r, double tol = 1e-10);
QuadResult<double> discrete_green_drifted(int x, int y, const DriftedWeights& s, double tol = 1e-10);

// Reusable form for sweeps at fixed weights.
class DiscreteGreen {
 public:
  explicit DiscreteGreen(const Laurent2& symbol, double tol = 1e-10);
  static DiscreteGreen massive(const FlippedWeights& r, double tol = 1e-10);
  static DiscreteGreen drifted(const DriftedWeights& s, double tol = 1e-10);
  QuadResult<double> operator()(int x, int y) const;

 private:
  TorusIntegrator integ_;
};

}  // namespace dimers
