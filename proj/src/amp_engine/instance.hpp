#pragma once

#include <cstdint>

#include "amp_engine/rules.hpp"
#include "priors_channels/channel.hpp"
#include "priors_channels/prior.hpp"

namespace gfomlb {

struct Instance {
  Model model = Model::regression;
  Mat X;       // n x p
  Mat theta;   // p x r
  Mat lambda;  // n x r (low rank only)
  Vec y;       // n (zeros in the low-rank model)
  Mat u;       // n x r (channel u atoms for regression, Λ side information for low rank)
  Mat v;       // p x r
  std::uint64_t seed = 0;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
  int dim() const { return static_cast<int>(theta.cols()); }
};

// X_ij ~ N(0, 1/n), (θ_j, v_j) ~ prior, y_i = h(x_iᵀθ, w_i, u_i).
Instance make_regression_instance(int n, int p, const JointPrior& prior,
                                  const OutputChannel& channel, std::uint64_t seed);

// X = λθᵀ/n + Z with Z_ij ~ N(0, 1/n); y = 0.
Instance make_lowrank_instance(int n, int p, const JointPrior& prior_theta,
                               const JointPrior& prior_lambda, std::uint64_t seed);

}  // namespace gfomlb
