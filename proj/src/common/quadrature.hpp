#pragma once

#include <vector>

#include "common/linalg.hpp"

namespace gfomlb {

inline constexpr int kDefaultHermiteOrder = 61;

// Gauss-Hermite rule for expectations over G ~ N(0,1): E f(G) ~ sum_i w_i f(x_i), sum w_i = 1.
struct GaussQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
};

// Built once per order and cached; the returned reference stays valid for the
// life of the process and may be shared across threads.
const GaussQuadrature& gauss_hermite(int order = kDefaultHermiteOrder);

// Tensor-product rule over N(0, I_dim). nodes has one column per point.
struct TensorQuadrature {
  int dim = 0;
  Mat nodes;
  std::vector<double> weights;
};

const TensorQuadrature& gauss_hermite_tensor(int dim, int order);

// Per-axis order used for dim-dimensional tensor rules so that the point count
// stays in the low thousands (61, 41, 15, 9 for dim 1..4).
int default_tensor_order(int dim);

// Trapezoid rule for N(0,1) on [-9, 9] with `points` equally spaced nodes,
// weights phi(x) h renormalized to sum 1. Converges geometrically in the
// distance from the real axis to the nearest complex singularity of the
// integrand, which suits posterior means at high SNR better than Gauss-Hermite.
const GaussQuadrature& gaussian_grid(int points);
const TensorQuadrature& gaussian_grid_tensor(int dim, int points);

}  // namespace gfomlb
