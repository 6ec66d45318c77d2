#pragma once

#include <array>
#include <cstddef>
#include <functional>

#include "common/quadrature.hpp"
#include "priors_channels/channel.hpp"

namespace gfomlb {

struct LineIntegralOptions {
  double tail_mass = 1e-10;  // allowed probability mass outside the final window
  double rel_tol = 1e-7;     // relative change between successive refinements
  double abs_tol = 1e-14;
  std::size_t max_points = std::size_t{1} << 20;
  int max_expansions = 12;
};

// Adaptive trapezoid over y. The integrand returns {density, target, aux}: the
// window grows until the density's mass is within tail_mass of 1, and the grid
// is halved until density and target integrals stop changing. aux is carried
// along unchecked.
struct LineIntegral {
  std::array<double, 3> value{};
  std::array<double, 3> edge{};  // integrand values at the final window edges (max |.|)
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;
};

LineIntegral integrate_line(const std::function<std::array<double, 3>(double)>& integrand,
                            double lo, double hi, const LineIntegralOptions& opts = {});

struct ScoreOptions {
  int outer_order = kDefaultHermiteOrder;  // Gauss-Hermite points over G0
  LineIntegralOptions line;
};

struct ScoreResult {
  double value = 0.0;
  bool degenerate = false;  // tilde_tau below 1e-12; value forced to 0
  std::size_t grid_points = 0;
};

// (1/τ̃²) E[ E[G1 | Y, G0, U]² ] for Y = h(σ G0 + τ̃ G1, W, U), evaluated as
// E_{G0,U} ∫ (∂_m S)² / S dy with S the Gaussian-smoothed channel density.
ScoreResult score_expectation(const OutputChannel& channel, double sigma, double tilde_tau,
                              const ScoreOptions& opts = {});

}  // namespace gfomlb
