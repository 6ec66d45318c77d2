#pragma once

#include <string>
#include <vector>

#include "priors_channels/prior.hpp"

namespace gfomlb {

struct SpcaConfig {
  double mu = 1.0;
  double eps = 1.0;
  double delta = 1.0;
  double alpha = 0.0;

  void validate() const;
  // α̃ = α / (μ²ε(1−α)).
  double alpha_tilde() const;
};

// e^{-s μ²} μ² ε² E[ sinh²(μ√s G) / (1 − ε + ε e^{-sμ²/2} cosh(μ√s G)) ]: the
// second moment of the posterior mean of a three-point variable observed at
// SNR s. Equals the second-moment map of the unscaled three-point prior.
double three_point_posterior_second_moment(double mu, double eps, double snr);

// V_±(q) = three_point_posterior_second_moment(μ, ε, δ q).
double spca_vpm(const SpcaConfig& cfg, double q);

struct SpcaTrace {
  std::vector<double> q;
  bool converged = false;
};

// q_{t+1} = V(q_t + α̃) / (1 + V(q_t + α̃)), q_0 = 0, for t = 0..t_max.
SpcaTrace spca_recursion(const SpcaConfig& cfg, int t_max, double tol = 1e-12);

// √(V_±(q + α̃) / (μ²ε)), clamped to [0, 1].
double spca_bound_from_q(const SpcaConfig& cfg, double q);
double spca_correlation_bound(const SpcaConfig& cfg, int t);

struct CorollaryConstants {
  std::string regime;  // "a", "b" or "none"
  double alpha_star = 0.0;
  double c_star = 0.0;
};

CorollaryConstants spca_corollary_constants(double r, double delta, double eps);

// Priors for simulating the sparse PCA model in the per-coordinate scaling used
// by state evolution: Θ = √δ Θ0 with Θ0 three-point, Gaussian side information
// of SNR α̃ on that scale, and Λ ~ N(0,1) discretized on `lambda_atoms` nodes.
struct SpcaPriors {
  JointPrior theta;
  JointPrior lambda;
};
SpcaPriors spca_priors(const SpcaConfig& cfg, int lambda_atoms = 61);

}  // namespace gfomlb
