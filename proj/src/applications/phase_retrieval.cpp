#include "applications/phase_retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "applications/spca.hpp"
#include "common/errors.hpp"
#include "common/linalg.hpp"

namespace gfomlb {

void PrConfig::validate() const {
  if (!channel.symmetric) throw ConfigError("phase retrieval: channel must be symmetric");
  if (!channel.has_density()) throw ConfigError("channel density required for SE");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("pr.delta: must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("pr.eps: must be in (0, 1]");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("pr.alpha: must be in [0, 1)");
}

double PrConfig::mu() const { return 1.0 / std::sqrt(eps); }

double pr_f_eps(double eps, double q) {
  return three_point_posterior_second_moment(1.0 / std::sqrt(eps), eps, q);
}

double pr_h(const OutputChannel& channel, double q, const ScoreOptions& opts) {
  if (std::isnan(q) || q < 0.0) throw DomainError("H: q must be in [0, 1]");
  q = std::min(q, 1.0);
  return score_expectation(channel, std::sqrt(q), std::sqrt(1.0 - q), opts).value;
}

PrTrace pr_recursion(const PrConfig& cfg, int t_max, double tol, const ScoreOptions& opts) {
  cfg.validate();
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  const double at = cfg.alpha_tilde();
  PrTrace trace;
  trace.q.push_back(0.0);
  for (int t = 0; t <= t_max; ++t) {
    const double qhat = pr_f_eps(cfg.eps, trace.q.back() + at);
    trace.qhat.push_back(qhat);
    if (t == t_max) break;
    const double next = cfg.delta * pr_h(cfg.channel, qhat, opts);
    if (std::abs(next - trace.q.back()) < tol) trace.converged = true;
    trace.q.push_back(next);
  }
  return trace;
}

double pr_correlation_bound(const PrConfig& cfg, int t) {
  if (t < 0) throw ConfigError("t: must be >= 0");
  const PrTrace trace = pr_recursion(cfg, std::max(t, 1));
  return std::sqrt(std::max(trace.qhat[t], 0.0));
}

DeltaSpResult delta_sp(const OutputChannel& channel, const LineIntegralOptions& opts) {
  if (!channel.symmetric) throw DomainError("delta_sp: channel must be symmetric");
  if (!channel.has_density()) throw ConfigError("channel density required for SE");

  // E_G[p(y|G)] and E_G[p(y|G)(G²−1)] are the smoothed density at m = 0,
  // var = 1 and its second m-derivative.
  auto integrand = [&](double y) -> std::array<double, 3> {
    double mass = 0.0, squared = 0.0, ratio = 0.0;
    for (std::size_t iu = 0; iu < channel.u_atoms.size(); ++iu) {
      const double wu = channel.u_weights[iu];
      const SmoothedDensity s = smoothed_density(channel, y, 0.0, 1.0, channel.u_atoms[iu]);
      mass += wu * s.value;
      if (s.value > 1e-300) {
        squared += wu * s.d2 * s.d2 / s.value;
        ratio += wu * s.d2 / s.value;
      }
    }
    return {mass, squared, ratio};
  };
  auto [lo, hi] = observation_range(channel, 1.0);
  LineIntegral li = integrate_line(integrand, lo, hi, opts);

  DeltaSpResult out;
  out.inverse = li.value[1];
  out.value = out.inverse > 1e-300 ? 1.0 / out.inverse : kInf;
  out.ratio_form_integrable = li.edge[2] < 1e-6;
  out.ratio_form_integral = out.ratio_form_integrable ? li.value[2] : NAN;
  if (!out.ratio_form_integrable) {
    out.diagnostic =
        "ratio-form integrand E_G[p(y|G)(G^2-1)]/E_G[p(y|G)] does not decay (|value| " +
        std::to_string(li.edge[2]) + " at the window edge); threshold computed from the "
        "squared-numerator form";
  }
  return out;
}

PrConstants pr_corollary_constants(double delta, double delta_sp_value) {
  if (!(delta > 0.0) || !(delta < delta_sp_value)) {
    throw DomainError("pr constants: need 0 < delta < delta_sp");
  }
  PrConstants c;
  c.eta = (delta_sp_value - delta) / (2.0 * delta_sp_value);
  c.c_star = std::sqrt(2.0 * (1.0 + c.eta) * (1.0 + 1.0 / c.eta));
  return c;
}

}  // namespace gfomlb
