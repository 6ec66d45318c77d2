#pragma once

#include <string>
#include <vector>

#include "amp_engine/onsager.hpp"
#include "amp_engine/rules.hpp"
#include "state_evolution/se.hpp"

namespace gfomlb {

// Posterior-mean AMP built from its state evolution, with analytic Jacobians
// and memory coefficients. Rules f_0..f_{horizon-1}, g_1..g_horizon.
struct BayesAmp {
  Model model = Model::regression;
  int horizon = 0;
  UpdateRuleSeq rules;
  OnsagerCoeffs onsager;
  AmpSECoeffs se;
  RegressionTrace regression_trace;
  LowRankTrace lowrank_trace;
  std::vector<std::string> warnings;
};

// Requires E[Θ | V] = 0. The horizon may end before t_max when the
// effective noise level underflows (a warning is recorded).
BayesAmp bayes_amp_regression(const JointPrior& prior, const OutputChannel& channel, double delta,
                              int t_max, const SeOptions& opts = {});

BayesAmp bayes_amp_lowrank(const JointPrior& prior_theta, const JointPrior& prior_lambda,
                           double delta, int t_max, int quad_order = 0);

}  // namespace gfomlb
