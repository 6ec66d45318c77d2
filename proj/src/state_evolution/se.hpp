#pragma once

#include <string>
#include <vector>

#include "common/linalg.hpp"
#include "priors_channels/channel.hpp"
#include "priors_channels/prior.hpp"
#include "priors_channels/score.hpp"
#include "state_evolution/coeffs.hpp"

namespace gfomlb {

struct SeOptions {
  int t_max = 200;
  double tol = 1e-12;
  bool stop_on_convergence = true;
  int quad_order = 0;  // 0 lets the moment maps choose a rule
  ScoreOptions score;
};

struct RegressionSEState {
  int t = 0;
  double tau2 = kInf;
  double sigma2 = 0.0;
  double tilde_tau2 = 0.0;
  bool perfect_knowledge = false;  // mmse(tau2) = 0
};

struct RegressionTrace {
  std::vector<RegressionSEState> states;
  // scores[s] = (1/τ̃_s²) E[E[G1|Y,G0,U]²], the quantity that produced states[s+1].
  std::vector<double> scores;
  bool converged = false;
  std::vector<std::string> warnings;
};

// State at index t given tau2 (fills sigma2, tilde_tau2 from the mmse).
RegressionSEState regression_state(const JointPrior& prior, double delta, double tau2, int t,
                                   int quad_order = 0);

RegressionSEState se_regression_initial(const JointPrior& prior, double delta, int quad_order = 0);

// One step of the regression recursion. `score_out`, when given, receives the
// score expectation used for the step.
RegressionSEState se_regression_step(const RegressionSEState& state, const JointPrior& prior,
                                     const OutputChannel& channel, double delta,
                                     const SeOptions& opts = {}, double* score_out = nullptr,
                                     bool* degenerate_out = nullptr);

RegressionTrace se_regression_run(const JointPrior& prior, const OutputChannel& channel,
                                  double delta, const SeOptions& opts = {});

struct LowRankSEState {
  int t = 0;
  Mat Q;
  Mat Qhat;
  Mat v_theta;  // V_{Θ,V}(Q_t); Qhat = v_theta / δ for t >= 1
};

struct LowRankTrace {
  std::vector<LowRankSEState> states;
  bool converged = false;
};

// Q̂_0 = 0; Q_0 is stored as 0 so that the t = 0 bound is the no-data bound.
LowRankSEState se_lowrank_initial(const JointPrior& prior_theta, int quad_order = 0);

LowRankSEState se_lowrank_step(const LowRankSEState& state, const JointPrior& prior_theta,
                               const JointPrior& prior_lambda, double delta, int quad_order = 0);

LowRankTrace se_lowrank_run(const JointPrior& prior_theta, const JointPrior& prior_lambda,
                            double delta, const SeOptions& opts = {});

// Square-loss lower bounds per trace entry.
std::vector<double> se_lower_bound_mse(const RegressionTrace& trace, const JointPrior& prior,
                                       int quad_order = 0);
std::vector<double> se_lower_bound_mse(const LowRankTrace& trace, const JointPrior& prior_theta);

// Bayes-AMP coefficient arrays up to t_max. The regression variant requires
// E[Θ | V] = 0 (so that f_0 carries all the first-step information).
AmpSECoeffs bayes_amp_coeffs_regression(const RegressionTrace& trace, const JointPrior& prior,
                                        double delta, int t_max,
                                        std::vector<std::string>* warnings = nullptr);
AmpSECoeffs bayes_amp_coeffs_lowrank(const LowRankTrace& trace, int t_max);

std::string regression_trace_csv(const RegressionTrace& trace, const std::vector<double>& lb);
std::string lowrank_trace_csv(const LowRankTrace& trace, const std::vector<double>& lb);

}  // namespace gfomlb
