#pragma once

#include <vector>

#include "common/linalg.hpp"
#include "common/quadrature.hpp"
#include "priors_channels/prior.hpp"

namespace gfomlb {

// Posterior of Θ restricted to one side class, for Gaussian evidence written in
// natural form: weight_a ∝ w_a exp(sᵀθ_a − ½ θ_aᵀ P θ_a). Every Gaussian
// observation model used here reduces to a statistic s and a precision P.
class TiltedPosterior {
 public:
  TiltedPosterior(const JointPrior& prior, const SideClass& cls, const Mat& precision);

  Vec mean(const Vec& s) const;
  void moments(const Vec& s, Vec& mean, Mat& cov) const;

  double mean_scalar(double s) const;
  void moments_scalar(double s, double& mean, double& var) const;

 private:
  int dim_;
  Mat thetas_;  // dim x atoms
  std::vector<double> log_base_;
};

// Adds the Gaussian side channel (if any) to the precision of an observation.
Mat total_precision(const JointPrior& prior, const Mat& q);
// Contribution of an observed Gaussian side vector to the natural statistic.
Vec side_statistic(const JointPrior& prior, const Vec& v);

// E[Θ | Q^{1/2}Θ + G = y; V = v].
Vec posterior_mean(const JointPrior& prior, const Vec& y, const Mat& q, const Vec& v);

struct GaussianObservationMoments {
  Mat mean_second_moment;  // E[ E[Θ|·] E[Θ|·]ᵀ ]
  Mat error_covariance;    // E[ (Θ − E[Θ|·])(Θ − E[Θ|·])ᵀ ]
};

// Both moments for the observation Q^{1/2}Θ + G together with V. order 0 picks
// a rule from the prior spread and precision; a positive order forces tensor
// Gauss-Hermite with that many points per axis.
GaussianObservationMoments gaussian_observation_moments(const JointPrior& prior, const Mat& q,
                                                        int order = 0);

Mat v_second_moment(const JointPrior& prior, const Mat& q, int order = 0);

// tau2 may be kInf (observation absent). tau2 <= 0 is a domain error.
double mmse_scalar(const JointPrior& prior, double tau2, int order = 0);

}  // namespace gfomlb
