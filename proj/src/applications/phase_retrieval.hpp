#pragma once

#include <string>
#include <vector>

#include "priors_channels/channel.hpp"
#include "priors_channels/score.hpp"

namespace gfomlb {

struct PrConfig {
  OutputChannel channel;
  double delta = 1.0;
  double eps = 1.0;
  double alpha = 0.0;

  void validate() const;
  double alpha_tilde() const { return alpha / (1.0 - alpha); }
  double mu() const;  // 1/√ε, unit second moment
};

// F_ε(q) = E[E[Θ0 | √q Θ0 + G]²] for the unit-variance three-point prior.
double pr_f_eps(double eps, double q);

// H(q) = E[E[G1 | Y, G0]²]/(1 − q) with Y = h(√q G0 + √(1−q) G1, W), q in [0, 1].
double pr_h(const OutputChannel& channel, double q, const ScoreOptions& opts = {});

struct PrTrace {
  std::vector<double> q;     // q_0 .. q_{t_max}
  std::vector<double> qhat;  // q̂_0 .. q̂_{t_max}
  bool converged = false;
};

// q̂_t = F_ε(q_t + α̃), q_{t+1} = δ H(q̂_t), q_0 = 0.
PrTrace pr_recursion(const PrConfig& cfg, int t_max, double tol = 1e-12,
                     const ScoreOptions& opts = {});

double pr_correlation_bound(const PrConfig& cfg, int t);

struct DeltaSpResult {
  double value = 0.0;             // δ_sp, or kInf
  double inverse = 0.0;           // ∫ E_G[p(y|G)(G²−1)]² / E_G[p(y|G)] dy
  bool ratio_form_integrable = false;
  double ratio_form_integral = 0.0;  // ∫ E_G[p(G²−1)] / E_G[p] dy when integrable, else NaN
  std::string diagnostic;
};

// Weak-recovery threshold of a symmetric channel. The value uses the squared
// numerator, which matches the small-q slope of H; the ratio form is reported
// separately because its integrand does not decay for the registry channels.
DeltaSpResult delta_sp(const OutputChannel& channel, const LineIntegralOptions& opts = {});

// Constants for the subcritical regime: η = (δ_sp − δ)/(2δ_sp) bounds q_t by
// α̃/η, and the overlap bound √q̂_t stays below c_star √α for α ≤ 1/2 in the
// small-q range where F_ε(q) ≤ (1 + η) q.
struct PrConstants {
  double eta = 0.0;
  double c_star = 0.0;
};
PrConstants pr_corollary_constants(double delta, double delta_sp_value);

}  // namespace gfomlb
