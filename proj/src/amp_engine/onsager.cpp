#include "amp_engine/onsager.hpp"

#include <cmath>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace gfomlb {
namespace {

enum Stream : std::uint64_t {
  kTheta = 1000,  // and 1001
  kLambda = 1010, // and 1011
  kNoise = 1020,
  kChannelU = 1021,
  kAEps = 2000,
  kBEps = 3000,
};

struct MeanStats {
  Mat mean;
  Mat stderr_;
};

// Entry (a, b) is the sample mean of A_a B_b over rows.
MeanStats outer_mean(const Mat& a, const Mat& b) {
  const Eigen::Index n = a.rows();
  MeanStats out{Mat(a.cols(), b.cols()), Mat(a.cols(), b.cols())};
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      const Vec prod = a.col(i).cwiseProduct(b.col(j));
      const double m = prod.mean();
      const double var = n > 1 ? (prod.array() - m).square().sum() / double(n - 1) : 0.0;
      out.mean(i, j) = m;
      out.stderr_(i, j) = std::sqrt(var / double(n));
    }
  }
  return out;
}

// Row-average of a flattened per-row Jacobian (N x r²) as an r x r matrix.
MeanStats jacobian_mean(const Mat& jac, int r) {
  const Eigen::Index n = jac.rows();
  MeanStats out{Mat(r, r), Mat(r, r)};
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) {
      const auto col = jac.col(a * r + b);
      const double m = col.mean();
      const double var = n > 1 ? (col.array() - m).square().sum() / double(n - 1) : 0.0;
      out.mean(a, b) = m;
      out.stderr_(a, b) = std::sqrt(var / double(n));
    }
  }
  return out;
}

double fd_scale(const Mat& m, Eigen::Index col) {
  const double rms = std::sqrt(m.col(col).squaredNorm() / double(std::max<Eigen::Index>(m.rows(), 1)));
  return rms > 0.0 ? rms : 1.0;
}

void require_finite(const Mat& m) {
  if (!m.allFinite()) throw NumericalError("divergent coefficient estimate");
}

}  // namespace

int SeModel::dim() const { return theta ? theta->dim() : 1; }

void SeModel::validate() const {
  if (!theta) throw ConfigError("SE model: prior for theta missing");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta: must be positive");
  if (model == Model::regression) {
    if (!channel) throw ConfigError("SE model: channel missing");
    if (theta->dim() != 1) throw ConfigError("regression: prior must be scalar");
  } else {
    if (!lambda) throw ConfigError("SE model: prior for lambda missing");
    if (lambda->dim() != theta->dim()) throw ConfigError("low rank: priors must share dim");
  }
}

Mat psd_cholesky(const Mat& a) {
  const Eigen::Index n = a.rows();
  Mat l = Mat::Zero(n, n);
  const double scale = std::max(a.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (d < -1e-6 * scale || !std::isfinite(d)) throw NumericalError("SE covariance degenerate");
    if (d <= 1e-12 * scale) continue;
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return l;
}

OnsagerRecursion::OnsagerRecursion(const SeModel& model, int dim, const McOptions& opts)
    : model_(model), dim_(dim), opts_(opts), onsager_(dim), se_(dim) {
  model_.validate();
  if (model_.dim() != dim) throw ConfigError("rule dimension does not match the prior");
  if (opts_.samples < 2) throw ConfigError("mc_samples: need at least 2");
  if (!(opts_.fd_step > 0.0)) throw ConfigError("fd_step: must be positive");
  count_ = static_cast<Eigen::Index>(opts_.samples);
  model_.theta->sample(opts_.seed, kTheta, count_, theta_, v_);
}

Mat OnsagerRecursion::sample_block(const BlockArray& cov, int first, int last,
                                   std::uint64_t stream) {
  std::vector<Mat>& eps = stream == kAEps ? a_eps_ : b_eps_;
  const int blocks = last - first + 1;
  while (static_cast<int>(eps.size()) < blocks) {
    CounterRng rng(opts_.seed, stream + eps.size());
    eps.push_back(rng.normal_matrix(count_, dim_));
  }
  const Mat l = psd_cholesky(cov.assemble(first, last));
  Mat out = Mat::Zero(count_, dim_);
  const Eigen::Index row = static_cast<Eigen::Index>(blocks - 1) * dim_;
  for (int j = 0; j < blocks; ++j) {
    out.noalias() += eps[j] * l.block(row, Eigen::Index(j) * dim_, dim_, dim_).transpose();
  }
  return out;
}

Mat OnsagerRecursion::mean_jacobian_g(const GRule& g, int s, Mat* stderr_out) {
  MeanStats stats;
  if (g.jacobian) {
    const Mat jac = g.jacobian(History(a_), v_, s);
    require_shape(jac, count_, Eigen::Index(dim_) * dim_, "g jacobian");
    stats = jacobian_mean(jac, dim_);
  } else {
    std::vector<Mat> hist = a_;
    Mat jac(count_, dim_ * dim_);
    Mat& target = hist[s - 1];
    for (int b = 0; b < dim_; ++b) {
      const double h = opts_.fd_step * fd_scale(a_[s - 1], b);
      target.col(b).array() += h;
      const Mat plus = g.eval(History(hist), v_);
      target.col(b) = a_[s - 1].col(b).array() - h;
      const Mat minus = g.eval(History(hist), v_);
      target.col(b) = a_[s - 1].col(b);
      for (int a = 0; a < dim_; ++a) jac.col(a * dim_ + b) = (plus.col(a) - minus.col(a)) / (2 * h);
    }
    stats = jacobian_mean(jac, dim_);
  }
  require_finite(stats.mean);
  if (stderr_out) *stderr_out = stats.stderr_;
  return stats.mean;
}

Mat OnsagerRecursion::mean_jacobian_f(const FRule& f, int s, Mat* stderr_out) {
  MeanStats stats;
  if (f.jacobian) {
    const Mat jac = f.jacobian(History(b_), y_, u_, s);
    require_shape(jac, count_, Eigen::Index(dim_) * dim_, "f jacobian");
    stats = jacobian_mean(jac, dim_);
  } else {
    std::vector<Mat> hist = b_;
    Mat jac(count_, dim_ * dim_);
    Mat& target = hist[s - 1];
    for (int b = 0; b < dim_; ++b) {
      const double h = opts_.fd_step * fd_scale(b_[s - 1], b);
      target.col(b).array() += h;
      const Mat plus = f.eval(History(hist), y_, u_);
      target.col(b) = b_[s - 1].col(b).array() - h;
      const Mat minus = f.eval(History(hist), y_, u_);
      target.col(b) = b_[s - 1].col(b);
      for (int a = 0; a < dim_; ++a) jac.col(a * dim_ + b) = (plus.col(a) - minus.col(a)) / (2 * h);
    }
    stats = jacobian_mean(jac, dim_);
  }
  require_finite(stats.mean);
  if (stderr_out) *stderr_out = stats.stderr_;
  return stats.mean;
}

void OnsagerRecursion::start(const FRule& f0) {
  if (next_f_ != 0) throw ConfigError("onsager recursion: start called twice");
  if (model_.model == Model::regression) {
    // Sample second moment keeps the (Θ, g_1, g_2, ...) covariance an exact Gram matrix.
    se_.Sigma.set(0, 0, outer_mean(theta_, theta_).mean / model_.delta);
    b0_ = sample_block(se_.Sigma, 0, 0, kBEps);
    const OutputChannel& ch = *model_.channel;
    noise_.resize(count_);
    CounterRng(opts_.seed, kNoise).fill_normal(noise_.data(), static_cast<std::size_t>(count_));
    CounterRng pick(opts_.seed, kChannelU);
    const auto cumulative = cumulative_weights(ch.u_weights);
    y_.resize(count_);
    u_.resize(count_, 1);
    for (Eigen::Index i = 0; i < count_; ++i) {
      const double u = ch.u_atoms[CounterRng::pick(cumulative, pick.uniform(i))];
      u_(i, 0) = u;
      y_(i) = ch.h(b0_(i, 0), noise_(i), u);
    }
  } else {
    model_.lambda->sample(opts_.seed, kLambda, count_, lambda_, u_);
    y_ = Vec::Zero(count_);
  }
  record_f(0, f0.eval, f0.eval(History(), y_, u_));
}

void OnsagerRecursion::record_f(int t, const YRule& rule, Mat out) {
  require_shape(out, count_, dim_, "f_" + std::to_string(t));
  require_finite(out);
  f_out_.push_back(std::move(out));
  const Mat& ft = f_out_.back();

  for (int s = 0; s <= t; ++s) {
    MeanStats m = outer_mean(f_out_[s], ft);
    se_.T.set(s + 1, t + 1, m.mean);
    if (s == t) diag_.T[t + 1] = m.stderr_;
  }

  MeanStats alpha;
  if (model_.model == Model::lowrank) {
    alpha = outer_mean(ft, lambda_);
  } else {
    // Stein's identity on the part of B^0 not explained by B^1..B^t.
    const double s00 = se_.Sigma.get(0, 0)(0, 0);
    Vec resid = b0_.col(0);
    double var_resid = s00;
    if (t > 0) {
      const Mat s_all = se_.Sigma.assemble(0, t);
      const Mat cross = s_all.block(0, 1, 1, t);
      const Mat pinv = psd_pinv(s_all.block(1, 1, t, t));
      const Mat beta = cross * pinv;
      Mat hist(count_, t);
      for (int s = 0; s < t; ++s) hist.col(s) = b_[s].col(0);
      resid -= hist * beta.transpose();
      var_resid = s00 - (beta * cross.transpose())(0, 0);
    }
    if (var_resid > 1e-10 * s00) {
      alpha = outer_mean(ft, resid);
      alpha.mean /= var_resid;
      alpha.stderr_ /= var_resid;
    } else {
      // B^0 is (almost) a function of the history: differentiate through y.
      const double h = opts_.fd_step * std::sqrt(std::max(s00, 1e-300));
      const OutputChannel& ch = *model_.channel;
      Vec yp(count_), ym(count_);
      for (Eigen::Index i = 0; i < count_; ++i) {
        yp(i) = ch.h(b0_(i, 0) + h, noise_(i), u_(i, 0));
        ym(i) = ch.h(b0_(i, 0) - h, noise_(i), u_(i, 0));
      }
      const Mat jac = (rule(History(b_), yp, u_) - rule(History(b_), ym, u_)) / (2 * h);
      alpha = jacobian_mean(jac, 1);
    }
  }
  require_finite(alpha.mean);
  se_.alphas[t + 1] = alpha.mean;
  diag_.alpha[t + 1] = alpha.stderr_;
  se_.horizon = t + 1;
  next_f_ = t + 1;
}

void OnsagerRecursion::advance_g(int t, const GRule& g) {
  if (t != next_g_ || se_.horizon < t) throw ConfigError("onsager recursion: g_" + std::to_string(t) + " out of order");
  Mat a = sample_block(se_.T, 1, t, kAEps);
  a.noalias() += theta_ * se_.alpha(t).transpose();
  a_.push_back(std::move(a));

  Mat out = g.eval(History(a_), v_);
  require_shape(out, count_, dim_, "g_" + std::to_string(t));
  require_finite(out);
  g_out_.push_back(std::move(out));
  const Mat& gt = g_out_.back();

  for (int s = 0; s < t; ++s) {
    Mat err;
    const Mat jac = mean_jacobian_g(g, s + 1, &err);
    onsager_.zeta.set(t, s, jac / model_.delta);
    if (s == t - 1) diag_.zeta[t] = err / model_.delta;
  }
  for (int s = 1; s <= t; ++s) se_.Sigma.set(s, t, outer_mean(g_out_[s - 1], gt).mean / model_.delta);
  if (model_.model == Model::regression) {
    se_.Sigma.set(0, t, outer_mean(theta_, gt).mean / model_.delta);
  } else {
    se_.gammas[t] = outer_mean(gt, theta_).mean / model_.delta;
  }
  ++next_g_;
}

void OnsagerRecursion::advance_f(int t, const FRule& f) {
  if (t != next_f_ || next_g_ != t + 1) throw ConfigError("onsager recursion: f_" + std::to_string(t) + " out of order");
  if (model_.model == Model::regression) {
    b_.push_back(sample_block(se_.Sigma, 0, t, kBEps));
  } else {
    Mat b = sample_block(se_.Sigma, 1, t, kBEps);
    b.noalias() += lambda_ * se_.gamma(t).transpose();
    b_.push_back(std::move(b));
  }
  for (int s = 1; s <= t; ++s) {
    Mat err;
    const Mat jac = mean_jacobian_f(f, s, &err);
    onsager_.xi.set(t, s, jac);
    if (s == t) diag_.xi[t] = err;
  }
  record_f(t, f.eval, f.eval(History(b_), y_, u_));
}

std::pair<OnsagerCoeffs, AmpSECoeffs> onsager_coeffs(const UpdateRuleSeq& rules,
                                                     const SeModel& model, int t_max,
                                                     const McOptions& opts,
                                                     McDiagnostics* diagnostics) {
  if (t_max < 1) throw ConfigError("t_max: must be at least 1");
  OnsagerRecursion rec(model, rules.dim, opts);
  rec.start(rules.f_at(0));
  for (int t = 1; t < t_max; ++t) {
    rec.advance_g(t, rules.g_at(t));
    rec.advance_f(t, rules.f_at(t));
  }
  if (diagnostics) *diagnostics = rec.diagnostics();
  return {rec.onsager(), rec.se()};
}

}  // namespace gfomlb
