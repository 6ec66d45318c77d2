#include "amp_engine/bayes_amp.hpp"

#include <cmath>
#include <memory>

#include "common/errors.hpp"
#include "priors_channels/bayes.hpp"

namespace gfomlb {
namespace {

// E[Θ | evidence] row by row, where a row x of evidence contributes the
// natural statistic M x and precision P. Optionally the Jacobian Cov·M.
class RowPosterior {
 public:
  RowPosterior(const JointPrior& prior, const Mat& m, const Mat& p)
      : prior_(prior), m_(m) {
    const Mat total = total_precision(prior, p);
    for (const SideClass& cls : prior.side_classes()) posts_.emplace_back(prior, cls, total);
  }

  void apply(const Mat& x, const Mat& side, Mat* mean, Mat* jac) const {
    const Eigen::Index rows = x.rows();
    const int r = prior_.dim();
    if (mean) mean->resize(rows, r);
    if (jac) jac->resize(rows, r * r);
    const auto& classes = prior_.side_classes();
    Vec mu(r);
    Mat cov(r, r);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Vec vi = side.row(i).transpose();
      Vec s = m_ * x.row(i).transpose();
      std::size_t k = 0;
      if (prior_.has_gaussian_side()) {
        s += side_statistic(prior_, vi);
      } else if (classes.size() > 1) {
        k = static_cast<std::size_t>(&prior_.class_for(vi) - classes.data());
      }
      if (jac) {
        posts_[k].moments(s, mu, cov);
        const Mat j = cov * m_;
        for (int a = 0; a < r; ++a) {
          for (int b = 0; b < r; ++b) (*jac)(i, a * r + b) = j(a, b);
        }
      } else {
        mu = posts_[k].mean(s);
      }
      if (mean) mean->row(i) = mu.transpose();
    }
  }

 private:
  const JointPrior& prior_;
  Mat m_;
  std::vector<TiltedPosterior> posts_;
};

// Natural statistic and precision for the observation x = coef Θ + noise,
// Cov(noise) = cov.
void gaussian_evidence(const Mat& coef, const Mat& cov, Mat& m, Mat& p) {
  const Mat pinv = psd_pinv(cov);
  m = coef.transpose() * pinv;
  p = symmetrize(m * coef);
}

}  // namespace

BayesAmp bayes_amp_regression(const JointPrior& prior, const OutputChannel& channel, double delta,
                              int t_max, const SeOptions& opts) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  if (prior.dim() != 1) throw ConfigError("regression: prior must be scalar");
  SeOptions run_opts = opts;
  run_opts.t_max = t_max;
  run_opts.stop_on_convergence = false;

  BayesAmp out;
  out.model = Model::regression;
  out.regression_trace = se_regression_run(prior, channel, delta, run_opts);
  out.warnings = out.regression_trace.warnings;
  out.se = bayes_amp_coeffs_regression(out.regression_trace, prior, delta, t_max, &out.warnings);
  out.horizon = out.se.horizon;
  out.rules.dim = 1;
  out.onsager = OnsagerCoeffs(1);

  auto shared_channel = std::make_shared<OutputChannel>(channel);
  auto shared_prior = std::make_shared<JointPrior>(prior);
  for (int t = 0; t < out.horizon; ++t) {
    const double var = out.regression_trace.states[t].tilde_tau2;
    const double sd = std::sqrt(var);
    // f_t = E[G | y, b^t] for B^0 = b^t + τ̃_t G.
    auto eval_row = [shared_channel, sd, var, t](History b, const Vec& y, const Mat& u,
                                                 bool want_jac) {
      Mat out(y.size(), 1);
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double m = t == 0 ? 0.0 : b[t - 1](i, 0);
        const SmoothedDensity s = smoothed_density(*shared_channel, y(i), m, var, u(i, 0));
        if (!(s.value > 1e-300)) {
          out(i, 0) = 0.0;
          continue;
        }
        const double r1 = s.d1 / s.value;
        out(i, 0) = want_jac ? sd * (s.d2 / s.value - r1 * r1) : sd * r1;
      }
      return out;
    };
    FRule f;
    f.eval = [eval_row](History b, const Vec& y, const Mat& u) { return eval_row(b, y, u, false); };
    if (t > 0) {
      f.jacobian = [eval_row, t](History b, const Vec& y, const Mat& u, int s) {
        if (s != t) return Mat(Mat::Zero(y.size(), 1));
        return eval_row(b, y, u, true);
      };
    }
    out.rules.f.push_back(std::move(f));
  }
  for (int t = 1; t <= out.horizon; ++t) {
    Mat m, p;
    gaussian_evidence(out.se.alpha(t), out.se.T.get(t, t), m, p);
    auto post = std::make_shared<RowPosterior>(*shared_prior, m, p);
    GRule g;
    g.eval = [post, shared_prior, t](History a, const Mat& v) {
      Mat mean;
      post->apply(a[t - 1], v, &mean, nullptr);
      return mean;
    };
    g.jacobian = [post, shared_prior, t](History a, const Mat& v, int s) {
      if (s != t) return Mat(Mat::Zero(a[0].rows(), 1));
      Mat jac;
      post->apply(a[t - 1], v, nullptr, &jac);
      return jac;
    };
    out.rules.g.push_back(std::move(g));
  }

  // E[∂f_t/∂b^t] = −α_{t+1}; (1/δ)E[∂g_t/∂a^t] = τ̃_t² α_t / T_{t,t}.
  for (int t = 1; t < out.horizon; ++t) {
    out.onsager.xi.set(t, t, -out.se.alpha(t + 1));
    const double ratio = out.se.alpha(t)(0, 0) / out.se.T.get(t, t)(0, 0);
    out.onsager.zeta.set(t, t - 1,
                         Mat::Constant(1, 1, out.regression_trace.states[t].tilde_tau2 * ratio));
  }
  return out;
}

BayesAmp bayes_amp_lowrank(const JointPrior& prior_theta, const JointPrior& prior_lambda,
                           double delta, int t_max, int quad_order) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  if (prior_theta.dim() != prior_lambda.dim()) throw ConfigError("low rank: priors must share dim");
  const int r = prior_theta.dim();
  SeOptions run_opts;
  run_opts.t_max = t_max;
  run_opts.stop_on_convergence = false;
  run_opts.quad_order = quad_order;

  BayesAmp out;
  out.model = Model::lowrank;
  out.lowrank_trace = se_lowrank_run(prior_theta, prior_lambda, delta, run_opts);
  out.se = bayes_amp_coeffs_lowrank(out.lowrank_trace, t_max);
  out.horizon = out.se.horizon;
  out.rules.dim = r;
  out.onsager = OnsagerCoeffs(r);

  auto ptheta = std::make_shared<JointPrior>(prior_theta);
  auto plambda = std::make_shared<JointPrior>(prior_lambda);
  std::vector<Mat> f_precision(out.horizon);
  for (int t = 0; t < out.horizon; ++t) {
    Mat m = Mat::Zero(r, r), p = Mat::Zero(r, r);
    if (t > 0) gaussian_evidence(out.se.gamma(t), out.se.Sigma.get(t, t), m, p);
    f_precision[t] = p;
    auto post = std::make_shared<RowPosterior>(*plambda, m, p);
    FRule f;
    f.eval = [post, plambda, t, r](History b, const Vec& y, const Mat& u) {
      Mat mean;
      const Mat x = t == 0 ? Mat(Mat::Zero(y.size(), r)) : b[t - 1];
      post->apply(x, u, &mean, nullptr);
      return mean;
    };
    if (t > 0) {
      f.jacobian = [post, plambda, t, r](History b, const Vec& y, const Mat& u, int s) {
        if (s != t) return Mat(Mat::Zero(y.size(), r * r));
        Mat jac;
        post->apply(b[t - 1], u, nullptr, &jac);
        return jac;
      };
    }
    out.rules.f.push_back(std::move(f));
    if (t > 0) {
      const Mat cov = gaussian_observation_moments(prior_lambda, p, quad_order).error_covariance;
      out.onsager.xi.set(t, t, cov * m);
    }
  }
  for (int t = 1; t <= out.horizon; ++t) {
    Mat m, p;
    gaussian_evidence(out.se.alpha(t), out.se.T.get(t, t), m, p);
    auto post = std::make_shared<RowPosterior>(*ptheta, m, p);
    GRule g;
    g.eval = [post, ptheta, t](History a, const Mat& v) {
      Mat mean;
      post->apply(a[t - 1], v, &mean, nullptr);
      return mean;
    };
    g.jacobian = [post, ptheta, t, r](History a, const Mat& v, int s) {
      if (s != t) return Mat(Mat::Zero(a[0].rows(), r * r));
      Mat jac;
      post->apply(a[t - 1], v, nullptr, &jac);
      return jac;
    };
    out.rules.g.push_back(std::move(g));
    if (t < out.horizon) {
      const Mat cov = gaussian_observation_moments(prior_theta, p, quad_order).error_covariance;
      out.onsager.zeta.set(t, t - 1, cov * m / delta);
    }
  }
  return out;
}

}  // namespace gfomlb
