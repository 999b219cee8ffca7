#pragma once

#include "dimers/laurent.hpp"

namespace dimers {

enum class SimdLevel { Scalar, Avx2 };

// best level the CPU supports; DIMERS_SIMD=scalar forces the reference path
SimdLevel active_simd_level();
const char* to_string(SimdLevel s);

// n x n grid on the torus of radii (e^log_rz, e^log_rw); node (j,k) at angles
// 2π(j + shift_z)/n, 2π(k + shift_w)/n
struct TorusGrid {
  int n = 256;
  double shift_z = 0.5;
  double shift_w = 0.5;
  double log_rz = 0;
  double log_rw = 0;
};

// (1/n²) Σ log|P|
double torus_mean_log_abs(const QuadLaurent& P, const TorusGrid& g, SimdLevel level = active_simd_level());

// (1/n²) Σ num/den · z^{-m} w^{-k}
cplx torus_fourier_mean(const QuadLaurent& num, const QuadLaurent& den, int m, int k, const TorusGrid& g,
                        SimdLevel level = active_simd_level());

struct TorusMin {
  double value = 0;
  double theta = 0;
  double phi = 0;
};

// min |P| over the grid nodes
TorusMin torus_min_abs(const QuadLaurent& P, const TorusGrid& g, SimdLevel level = active_simd_level());

}  // namespace dimers
