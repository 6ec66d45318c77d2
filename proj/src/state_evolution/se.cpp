#include "state_evolution/se.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/errors.hpp"
#include "common/format.hpp"
#include "priors_channels/bayes.hpp"

namespace gfomlb {
namespace {

double gap(double a, double b) {
  if (std::isinf(a) && std::isinf(b)) return 0.0;
  return std::abs(a - b);
}

void require_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta: must be positive");
}

}  // namespace

RegressionSEState regression_state(const JointPrior& prior, double delta, double tau2, int t,
                                   int quad_order) {
  require_delta(delta);
  const double tau_theta2 = prior.second_moment()(0, 0);
  const double mmse =
      tau2 == 0.0 ? 0.0
                  : mmse_scalar(prior, tau2, quad_order);
  RegressionSEState s;
  s.t = t;
  s.tau2 = tau2;
  s.tilde_tau2 = mmse / delta;
  s.sigma2 = (tau_theta2 - mmse) / delta;
  s.perfect_knowledge = mmse <= 0.0;
  return s;
}

RegressionSEState se_regression_initial(const JointPrior& prior, double delta, int quad_order) {
  if (prior.dim() != 1) throw ConfigError("regression state evolution needs a scalar prior");
  return regression_state(prior, delta, kInf, 0, quad_order);
}

RegressionSEState se_regression_step(const RegressionSEState& state, const JointPrior& prior,
                                     const OutputChannel& channel, double delta,
                                     const SeOptions& opts, double* score_out,
                                     bool* degenerate_out) {
  if (!channel.has_density()) throw ConfigError("channel density required for SE");
  double score = 0.0;
  bool degenerate = false;
  double next_tau2 = kInf;
  if (state.perfect_knowledge) {
    next_tau2 = 0.0;
    degenerate = true;
  } else {
    ScoreResult sr = score_expectation(channel, std::sqrt(std::max(state.sigma2, 0.0)),
                                       std::sqrt(std::max(state.tilde_tau2, 0.0)), opts.score);
    score = sr.value;
    degenerate = sr.degenerate;
    next_tau2 = score > 0.0 ? 1.0 / score : kInf;
  }
  if (score_out != nullptr) *score_out = score;
  if (degenerate_out != nullptr) *degenerate_out = degenerate;
  return regression_state(prior, delta, next_tau2, state.t + 1, opts.quad_order);
}

RegressionTrace se_regression_run(const JointPrior& prior, const OutputChannel& channel,
                                  double delta, const SeOptions& opts) {
  RegressionTrace trace;
  trace.states.push_back(se_regression_initial(prior, delta, opts.quad_order));
  for (int t = 0; t < opts.t_max; ++t) {
    double score = 0.0;
    bool degenerate = false;
    RegressionSEState next =
        se_regression_step(trace.states.back(), prior, channel, delta, opts, &score, &degenerate);
    if (degenerate && !trace.states.back().perfect_knowledge) {
      trace.warnings.push_back("t=" + std::to_string(t) +
                               ": tilde_tau below 1e-12, score set to 0");
    }
    const RegressionSEState& prev = trace.states.back();
    const double change = std::max({gap(next.tau2, prev.tau2), gap(next.sigma2, prev.sigma2),
                                    gap(next.tilde_tau2, prev.tilde_tau2)});
    trace.scores.push_back(score);
    trace.states.push_back(next);
    if (change < opts.tol) {
      trace.converged = true;
      if (opts.stop_on_convergence) break;
    }
  }
  return trace;
}

LowRankSEState se_lowrank_initial(const JointPrior& prior_theta, int quad_order) {
  const int r = prior_theta.dim();
  LowRankSEState s;
  s.t = 0;
  s.Q = Mat::Zero(r, r);
  s.Qhat = Mat::Zero(r, r);
  s.v_theta = v_second_moment(prior_theta, s.Q, quad_order);
  return s;
}

LowRankSEState se_lowrank_step(const LowRankSEState& state, const JointPrior& prior_theta,
                               const JointPrior& prior_lambda, double delta, int quad_order) {
  require_delta(delta);
  if (prior_theta.dim() != prior_lambda.dim() || state.Q.rows() != prior_theta.dim()) {
    throw ConfigError("low-rank state evolution: priors and state must share dim");
  }
  LowRankSEState next;
  next.t = state.t + 1;
  next.Q = v_second_moment(prior_lambda, state.Qhat, quad_order);
  next.v_theta = v_second_moment(prior_theta, next.Q, quad_order);
  next.Qhat = next.v_theta / delta;
  return next;
}

LowRankTrace se_lowrank_run(const JointPrior& prior_theta, const JointPrior& prior_lambda,
                            double delta, const SeOptions& opts) {
  LowRankTrace trace;
  trace.states.push_back(se_lowrank_initial(prior_theta, opts.quad_order));
  for (int t = 0; t < opts.t_max; ++t) {
    LowRankSEState next =
        se_lowrank_step(trace.states.back(), prior_theta, prior_lambda, delta, opts.quad_order);
    const LowRankSEState& prev = trace.states.back();
    const double change =
        std::max(max_abs(next.Q - prev.Q), max_abs(next.Qhat - prev.Qhat));
    trace.states.push_back(std::move(next));
    if (change < opts.tol) {
      trace.converged = true;
      if (opts.stop_on_convergence) break;
    }
  }
  return trace;
}

std::vector<double> se_lower_bound_mse(const RegressionTrace& trace, const JointPrior& prior,
                                       int quad_order) {
  std::vector<double> out;
  for (const auto& s : trace.states) {
    out.push_back(s.tau2 == 0.0 ? 0.0
                                : mmse_scalar(prior, s.tau2, quad_order));
  }
  return out;
}

std::vector<double> se_lower_bound_mse(const LowRankTrace& trace, const JointPrior& prior_theta) {
  const double total = prior_theta.second_moment_trace();
  std::vector<double> out;
  for (const auto& s : trace.states) out.push_back(std::max(total - s.v_theta.trace(), 0.0));
  return out;
}

AmpSECoeffs bayes_amp_coeffs_regression(const RegressionTrace& trace, const JointPrior& prior,
                                        double delta, int t_max,
                                        std::vector<std::string>* warnings) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  if (static_cast<int>(trace.states.size()) <= t_max) {
    throw ConfigError("Bayes-AMP coefficients: state-evolution trace shorter than t_max");
  }
  const double tau_theta2 = prior.second_moment()(0, 0);
  if (trace.states[0].sigma2 > 1e-12 * std::max(tau_theta2, 1e-300)) {
    throw ConfigError("Bayes-AMP for regression requires E[Θ | V] = 0");
  }

  AmpSECoeffs c(1);
  c.Sigma.set(0, 0, Mat::Constant(1, 1, tau_theta2 / delta));
  int horizon = t_max;
  for (int s = 1; s <= t_max; ++s) {
    const RegressionSEState& prev = trace.states[s - 1];
    if (prev.tilde_tau2 < 1e-24) {
      horizon = s - 1;
      if (warnings != nullptr) {
        warnings->push_back("Bayes-AMP horizon truncated at t=" + std::to_string(horizon) +
                            ": tilde_tau underflow");
      }
      break;
    }
    const double tilde = std::sqrt(prev.tilde_tau2);
    const double score = trace.scores.at(s - 1);
    c.alphas[s] = Mat::Constant(1, 1, tilde * score);
    c.T.set(s, s, Mat::Constant(1, 1, prev.tilde_tau2 * score));
    const RegressionSEState& cur = trace.states[s];
    c.Sigma.set(0, s, Mat::Constant(1, 1, cur.sigma2));
  }
  c.horizon = horizon;
  // Nested information: a^t/α_t = Θ + noise whose variance τ_t² shrinks in t,
  // with Cov(noise_s, noise_t) = τ_{max(s,t)}²; likewise B^s → B^t → B^0.
  for (int s = 1; s <= horizon; ++s) {
    for (int t = s + 1; t <= horizon; ++t) {
      const double at = c.alphas[t](0, 0);
      const double value = at > 0.0 ? c.alphas[s](0, 0) * c.T.get(t, t)(0, 0) / at : 0.0;
      c.T.set(s, t, Mat::Constant(1, 1, value));
    }
    for (int t = s; t <= horizon; ++t) {
      c.Sigma.set(s, t, Mat::Constant(1, 1, trace.states[s].sigma2));
    }
  }
  return c;
}

AmpSECoeffs bayes_amp_coeffs_lowrank(const LowRankTrace& trace, int t_max) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  if (static_cast<int>(trace.states.size()) <= t_max) {
    throw ConfigError("Bayes-AMP coefficients: state-evolution trace shorter than t_max");
  }
  const int r = static_cast<int>(trace.states[0].Q.rows());
  AmpSECoeffs c(r);
  for (int t = 1; t <= t_max; ++t) {
    const LowRankSEState& st = trace.states[t];
    c.alphas[t] = st.Q;
    c.gammas[t] = st.Qhat;
    for (int s = 1; s <= t; ++s) {
      c.T.set(s, t, trace.states[s].Q);
      c.Sigma.set(s, t, trace.states[s].Qhat);
    }
  }
  c.horizon = t_max;
  return c;
}

std::string regression_trace_csv(const RegressionTrace& trace, const std::vector<double>& lb) {
  std::ostringstream out;
  out << "t,tau2,sigma2,tilde_tau2,lb_mse\n";
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const auto& s = trace.states[i];
    out << s.t << ',' << format_double(s.tau2) << ',' << format_double(s.sigma2) << ','
        << format_double(s.tilde_tau2) << ',' << format_double(i < lb.size() ? lb[i] : NAN)
        << '\n';
  }
  return out.str();
}

std::string lowrank_trace_csv(const LowRankTrace& trace, const std::vector<double>& lb) {
  std::ostringstream out;
  const int r = trace.states.empty() ? 1 : static_cast<int>(trace.states[0].Q.rows());
  out << 't';
  for (const char* name : {"Q", "Qhat"}) {
    for (int i = 1; i <= r; ++i) {
      for (int j = 1; j <= r; ++j) out << ',' << name << '_' << i << j;
    }
  }
  out << ",lb_mse\n";
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    const auto& s = trace.states[k];
    out << s.t;
    for (const Mat* m : {&s.Q, &s.Qhat}) {
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < r; ++j) out << ',' << format_double((*m)(i, j));
      }
    }
    out << ',' << format_double(k < lb.size() ? lb[k] : NAN) << '\n';
  }
  return out.str();
}

}  // namespace gfomlb
