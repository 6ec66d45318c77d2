#include "priors_channels/score.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "common/errors.hpp"
#include "common/quadrature.hpp"

namespace gfomlb {
namespace {

using Triple = std::array<double, 3>;

bool settled(double now, double before, double rel, double abs) {
  return std::abs(now - before) <= rel * std::abs(now) + abs;
}

}  // namespace

LineIntegral integrate_line(const std::function<Triple(double)>& integrand, double lo, double hi,
                            const LineIntegralOptions& opts) {
  if (!(hi > lo)) throw DomainError("integrate_line: empty window");
  for (int expansion = 0; expansion <= opts.max_expansions; ++expansion) {
    std::size_t intervals = 128;
    double step = (hi - lo) / static_cast<double>(intervals);
    Triple sum{};
    Triple first = integrand(lo);
    Triple last = integrand(hi);
    for (int c = 0; c < 3; ++c) sum[c] = 0.5 * (first[c] + last[c]);
    for (std::size_t k = 1; k < intervals; ++k) {
      Triple f = integrand(lo + step * static_cast<double>(k));
      for (int c = 0; c < 3; ++c) sum[c] += f[c];
    }
    Triple estimate{};
    for (int c = 0; c < 3; ++c) estimate[c] = sum[c] * step;

    int refinements = 0;
    while (true) {
      if (2 * intervals + 1 > opts.max_points) throw NumericalError("score integral nonconvergent");
      // Midpoints of the current grid.
      for (std::size_t k = 0; k < intervals; ++k) {
        Triple f = integrand(lo + step * (static_cast<double>(k) + 0.5));
        for (int c = 0; c < 3; ++c) sum[c] += f[c];
      }
      intervals *= 2;
      step *= 0.5;
      Triple next{};
      for (int c = 0; c < 3; ++c) next[c] = sum[c] * step;
      ++refinements;
      const bool done = refinements >= 2 &&
                        settled(next[0], estimate[0], opts.rel_tol, opts.abs_tol) &&
                        settled(next[1], estimate[1], opts.rel_tol, opts.abs_tol);
      estimate = next;
      if (done) break;
    }

    if (1.0 - estimate[0] <= opts.tail_mass) {
      LineIntegral out;
      out.value = estimate;
      for (int c = 0; c < 3; ++c) out.edge[c] = std::max(std::abs(first[c]), std::abs(last[c]));
      out.lo = lo;
      out.hi = hi;
      out.points = intervals + 1;
      return out;
    }
    const double width = hi - lo;
    lo -= 0.25 * width;
    hi += 0.25 * width;
  }
  throw NumericalError("score integral nonconvergent");
}

ScoreResult score_expectation(const OutputChannel& channel, double sigma, double tilde_tau,
                              const ScoreOptions& opts) {
  if (!channel.has_density()) throw ConfigError("channel density required for SE");
  if (std::isnan(sigma) || sigma < 0.0) throw DomainError("score_expectation: sigma must be >= 0");
  if (std::isnan(tilde_tau) || tilde_tau < 0.0) {
    throw DomainError("score_expectation: tilde_tau must be positive");
  }
  ScoreResult result;
  if (tilde_tau < 1e-12) {
    result.degenerate = true;
    return result;
  }

  const double var = tilde_tau * tilde_tau;
  std::vector<double> g0_nodes{0.0};
  std::vector<double> g0_weights{1.0};
  if (sigma > 0.0) {
    const auto& q = gauss_hermite(opts.outer_order);
    g0_nodes = q.nodes;
    g0_weights = q.weights;
  }

  auto integrand = [&](double y) -> Triple {
    double mass = 0.0, score = 0.0;
    for (std::size_t iu = 0; iu < channel.u_atoms.size(); ++iu) {
      const double wu = channel.u_weights[iu];
      if (wu <= 0.0) continue;
      for (std::size_t k = 0; k < g0_nodes.size(); ++k) {
        const SmoothedDensity s =
            smoothed_density(channel, y, sigma * g0_nodes[k], var, channel.u_atoms[iu]);
        const double w = wu * g0_weights[k];
        mass += w * s.value;
        if (s.value > 1e-300) score += w * s.d1 * s.d1 / s.value;
      }
    }
    return {mass, score, 0.0};
  };

  auto [lo, hi] = observation_range(channel, std::sqrt(sigma * sigma + var));
  LineIntegral li = integrate_line(integrand, lo, hi, opts.line);
  result.value = std::max(li.value[1], 0.0);
  result.grid_points = li.points;
  return result;
}

}  // namespace gfomlb
