#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dimers/laurent.hpp"
#include "dimers/spectral.hpp"

namespace dimers {

struct AmoebaPoint {
  double u = 0;  // log|z|
  double v = 0;  // log|w|
};

struct AmoebaOptions {
  int grid = 256;
  double tol = -1;    // negative: 16·eps·Σ|c| e^{a u + b v}
  double band = 1e4;  // values in [tol, band·tol) are boundary-ambiguous
};

struct Membership {
  bool inside = false;
  bool ambiguous = false;
  double min_abs = 0;
  double tol = 0;
  double theta = 0;
  double phi = 0;
};

Membership amoeba_membership(const AmoebaPoint& p, const Laurent2& P, const AmoebaOptions& opt = {});
bool amoeba_contains(double u, double v, const CharPoly& P, double tol = -1);

struct Intercepts {
  double u_star = 0;  // hole meets the line v = 0 at ±u_star
  double v_star = 0;  // hole meets the line u = 0 at ±v_star
};

// flipped weights (1, 1-λ1ε, 1-λ2ε, 1), printed variables
Intercepts intercepts(double lambda1, double lambda2, double eps);
// the v-intercept exactly as printed, with 2 + 2ελ1 in place of 2 - 2ελ1
Intercepts intercepts_as_printed(double lambda1, double lambda2, double eps);

// bisection on membership along the u axis (axis 0) or v axis (axis 1); lo outside, hi inside
double bisect_boundary(const Laurent2& P, AmoebaPoint from, AmoebaPoint to, double tol, const AmoebaOptions& opt = {});

// boundary of the complement component around center, by marching rays outwards
std::vector<AmoebaPoint> hole_boundary(const Laurent2& P, AmoebaPoint center, int rays, double r_max, double tol,
                                       const AmoebaOptions& opt = {});

// Hausdorff distance between the closed polyline through pts (in order) and the circle
double hausdorff_to_circle(const std::vector<AmoebaPoint>& pts, AmoebaPoint center, double radius);

struct EllipseFit {
  AmoebaPoint center;
  double semi_major = 0, semi_minor = 0;
  double angle = 0;  // of the major axis, from the u axis
  AmoebaPoint focus1, focus2;
  double max_residual = 0;  // largest |distance to fitted ellipse| estimate over the samples
};

// least-squares conic through the samples (at least 5)
EllipseFit fit_ellipse(const std::vector<AmoebaPoint>& pts);

enum class PhaseLabel { Frozen, Liquid, Gaseous };
const char* to_string(PhaseLabel p);

class BoundaryAmbiguous : public Error {
 public:
  using Error::Error;
};

// Directions of the unbounded complement components: centres of the normal cones at the Newton
// polygon's vertices.
std::vector<std::pair<double, double>> recession_directions(const Laurent2& P);

PhaseLabel classify_phase(const Laurent2& P, AmoebaPoint p, const AmoebaOptions& opt = {});
PhaseLabel classify_phase(const CharPoly& P, AmoebaPoint p, const AmoebaOptions& opt = {});

}  // namespace dimers
