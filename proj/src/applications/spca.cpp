#include "applications/spca.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/errors.hpp"
#include "common/quadrature.hpp"

namespace gfomlb {
namespace {

// log sinh(x) and log cosh(x) for x >= 0 without overflow.
double log_sinh(double x) { return x + std::log(-std::expm1(-2.0 * x)) - std::numbers::ln2; }
double log_cosh(double x) { return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2; }

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double top = std::max(a, b);
  return top + std::log1p(std::exp(std::min(a, b) - top));
}

// log(1 − ε + ε e^{−a²/2} cosh(a y)).
double log_denominator(double eps, double a, double y) {
  const double lo = eps < 1.0 ? std::log1p(-eps) : -INFINITY;
  return log_add(lo, std::log(eps) - 0.5 * a * a + log_cosh(std::abs(a * y)));
}

}  // namespace

void SpcaConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("spca.mu: must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("spca.eps: must be in (0, 1]");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("spca.delta: must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("spca.alpha: must be in [0, 1)");
}

double SpcaConfig::alpha_tilde() const { return alpha / (mu * mu * eps * (1.0 - alpha)); }

double three_point_posterior_second_moment(double mu, double eps, double snr) {
  if (std::isnan(snr) || snr < 0.0) throw DomainError("posterior second moment: snr must be >= 0");
  if (std::isinf(snr)) return mu * mu * eps;
  const double a = mu * std::sqrt(snr);
  if (a == 0.0) return 0.0;
  // The posterior mean has poles about pi/a off the real axis; a uniform grid
  // with a few steps inside that strip converges geometrically.
  const double step = std::min(0.3, std::numbers::pi / (6.0 * a));
  const int points = 20 * ((static_cast<int>(std::ceil(18.0 / step)) + 19) / 20) + 1;
  const auto& q = gaussian_grid(std::clamp(points, 121, 8001));
  double acc = 0.0;
  if (a <= 1.5) {
    // Direct evaluation of the expectation over G.
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double x = std::abs(a * q.nodes[k]);
      if (x == 0.0) continue;
      acc += q.weights[k] *
             std::exp(-a * a + 2.0 * log_sinh(x) - log_denominator(eps, a, q.nodes[k]));
    }
    acc *= mu * mu * eps * eps;
  } else {
    // For larger a the integrand peaks near |G| = a and has heavy weight in the
    // Gaussian tail. Writing it as E[D(G) m(G)²] with m the posterior mean and
    // moving the exponential tilts in D onto shifts of G gives
    // (1−ε)E[m(G)²] + εE[m(G+a)²], whose integrands are bounded.
    auto mean_sq = [&](double y) {
      const double x = std::abs(a * y);
      if (x == 0.0) return 0.0;
      const double log_num = std::log(mu * eps) - 0.5 * a * a + log_sinh(x);
      const double m = std::exp(log_num - log_denominator(eps, a, y));
      return m * m;
    };
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double g = q.nodes[k];
      acc += q.weights[k] * ((1.0 - eps) * mean_sq(g) + eps * mean_sq(g + a));
    }
  }
  return std::clamp(acc, 0.0, mu * mu * eps);
}

double spca_vpm(const SpcaConfig& cfg, double q) {
  if (std::isnan(q) || q < 0.0) throw DomainError("spca_vpm: q must be >= 0");
  return three_point_posterior_second_moment(cfg.mu, cfg.eps, cfg.delta * q);
}

SpcaTrace spca_recursion(const SpcaConfig& cfg, int t_max, double tol) {
  cfg.validate();
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  const double at = cfg.alpha_tilde();
  SpcaTrace trace;
  trace.q.push_back(0.0);
  for (int t = 0; t < t_max; ++t) {
    const double v = spca_vpm(cfg, trace.q.back() + at);
    const double next = v / (1.0 + v);
    if (std::abs(next - trace.q.back()) < tol) trace.converged = true;
    trace.q.push_back(next);
  }
  return trace;
}

double spca_bound_from_q(const SpcaConfig& cfg, double q) {
  const double v = spca_vpm(cfg, q + cfg.alpha_tilde());
  return std::clamp(std::sqrt(v / (cfg.mu * cfg.mu * cfg.eps)), 0.0, 1.0);
}

double spca_correlation_bound(const SpcaConfig& cfg, int t) {
  if (t < 0) throw ConfigError("t: must be >= 0");
  const SpcaTrace trace = spca_recursion(cfg, std::max(t, 1));
  return spca_bound_from_q(cfg, trace.q[t]);
}

CorollaryConstants spca_corollary_constants(double r, double delta, double eps) {
  if (!(r > 0.0) || !(delta > 0.0) || !(eps > 0.0 && eps <= 1.0)) {
    throw ConfigError("corollary constants: R, delta must be positive and eps in (0, 1]");
  }
  const double r2 = r * r;
  CorollaryConstants out;
  if (r2 < std::sqrt((1.0 - eps) / (4.0 * delta))) {
    out.regime = "b";
    out.alpha_star = std::min(eps / (4.0 * delta), 0.5);
    out.c_star = 3.0 / r2;
  } else if (r2 < 1.0 / std::sqrt(delta)) {
    out.regime = "a";
  } else {
    out.regime = "none";
  }
  return out;
}

SpcaPriors spca_priors(const SpcaConfig& cfg, int lambda_atoms) {
  cfg.validate();
  return {JointPrior::three_point(cfg.mu, cfg.eps, std::sqrt(cfg.delta), cfg.alpha_tilde()),
          JointPrior::gaussian(lambda_atoms)};
}

}  // namespace gfomlb
