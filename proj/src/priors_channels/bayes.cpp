#include "priors_channels/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/errors.hpp"

namespace gfomlb {

TiltedPosterior::TiltedPosterior(const JointPrior& prior, const SideClass& cls,
                                 const Mat& precision)
    : dim_(prior.dim()) {
  std::vector<int> kept;
  for (std::size_t k = 0; k < cls.atoms.size(); ++k) {
    if (cls.weights[k] > 0.0) kept.push_back(static_cast<int>(k));
  }
  thetas_.resize(dim_, static_cast<Eigen::Index>(kept.size()));
  log_base_.resize(kept.size());
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const Vec& theta = prior.atoms()[cls.atoms[kept[j]]].theta;
    thetas_.col(static_cast<Eigen::Index>(j)) = theta;
    log_base_[j] = std::log(cls.weights[kept[j]]) - 0.5 * theta.dot(precision * theta);
  }
}

Vec TiltedPosterior::mean(const Vec& s) const {
  if (dim_ == 1) return Vec::Constant(1, mean_scalar(s(0)));
  const Eigen::Index k = thetas_.cols();
  Vec logw(k);
  for (Eigen::Index j = 0; j < k; ++j) logw(j) = log_base_[j] + s.dot(thetas_.col(j));
  const double top = logw.maxCoeff();
  Vec w = (logw.array() - top).exp();
  return thetas_ * w / w.sum();
}

void TiltedPosterior::moments(const Vec& s, Vec& mean, Mat& cov) const {
  if (dim_ == 1) {
    double m = 0.0, v = 0.0;
    moments_scalar(s(0), m, v);
    mean = Vec::Constant(1, m);
    cov = Mat::Constant(1, 1, v);
    return;
  }
  const Eigen::Index k = thetas_.cols();
  Vec logw(k);
  for (Eigen::Index j = 0; j < k; ++j) logw(j) = log_base_[j] + s.dot(thetas_.col(j));
  const double top = logw.maxCoeff();
  Vec w = (logw.array() - top).exp();
  w /= w.sum();
  mean = thetas_ * w;
  Mat centered = thetas_.colwise() - mean;
  cov = centered * w.asDiagonal() * centered.transpose();
}

double TiltedPosterior::mean_scalar(double s) const {
  const Eigen::Index k = thetas_.cols();
  double top = -INFINITY;
  for (Eigen::Index j = 0; j < k; ++j) top = std::max(top, log_base_[j] + s * thetas_(0, j));
  double num = 0.0, den = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double w = std::exp(log_base_[j] + s * thetas_(0, j) - top);
    num += w * thetas_(0, j);
    den += w;
  }
  return num / den;
}

void TiltedPosterior::moments_scalar(double s, double& mean, double& var) const {
  const Eigen::Index k = thetas_.cols();
  double top = -INFINITY;
  for (Eigen::Index j = 0; j < k; ++j) top = std::max(top, log_base_[j] + s * thetas_(0, j));
  double den = 0.0, num = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double w = std::exp(log_base_[j] + s * thetas_(0, j) - top);
    num += w * thetas_(0, j);
    den += w;
  }
  mean = num / den;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double w = std::exp(log_base_[j] + s * thetas_(0, j) - top);
    const double d = thetas_(0, j) - mean;
    acc += w * d * d;
  }
  var = acc / den;
}

namespace {

// Quadrature over G ~ N(0, I_r) for integrands of the form f(E[Θ | Pθ + root G]).
// The posterior mean has complex poles about pi / (|root| spread) away from the
// real axis; the uniform grid is sized to keep a few steps inside that strip.
// An explicit order, or r > 2, uses Gauss-Hermite.
const TensorQuadrature& observation_rule(const JointPrior& prior, const Mat& root, int order) {
  const int r = prior.dim();
  if (order > 0 || r > 2) {
    return gauss_hermite_tensor(r, order > 0 ? order : default_tensor_order(r));
  }
  double spread = 0.0;
  for (const SideClass& cls : prior.side_classes()) {
    for (std::size_t a = 0; a < cls.atoms.size(); ++a) {
      if (cls.weights[a] < 1e-12) continue;
      for (std::size_t b = a + 1; b < cls.atoms.size(); ++b) {
        if (cls.weights[b] < 1e-12) continue;
        const Vec diff = prior.atoms()[cls.atoms[a]].theta - prior.atoms()[cls.atoms[b]].theta;
        spread = std::max(spread, diff.norm());
      }
    }
  }
  const double scale = root.norm() * spread;
  double step = 0.3;
  if (scale > 0.0) step = std::min(step, std::numbers::pi / (6.0 * scale));
  int points = static_cast<int>(std::ceil(18.0 / step));
  points = 20 * ((points + 19) / 20) + 1;
  if (r == 1) return gaussian_grid_tensor(1, std::clamp(points, 121, 8001));
  return gaussian_grid_tensor(2, std::clamp(points, 61, 301));
}

}  // namespace

Mat total_precision(const JointPrior& prior, const Mat& q) {
  return prior.has_gaussian_side() ? Mat(q + prior.side_snr()) : q;
}

Vec side_statistic(const JointPrior& prior, const Vec& v) {
  if (!prior.has_gaussian_side()) return Vec::Zero(prior.dim());
  return prior.side_snr_sqrt() * v;
}

Vec posterior_mean(const JointPrior& prior, const Vec& y, const Mat& q, const Vec& v) {
  if (y.size() != prior.dim() || v.size() != prior.dim() || q.rows() != prior.dim()) {
    throw ConfigError("posterior_mean: argument dimensions differ from prior.dim");
  }
  require_psd(q, "posterior_mean Q");
  const SideClass& cls = prior.class_for(v);
  TiltedPosterior post(prior, cls, total_precision(prior, q));
  return post.mean(psd_sqrt(q) * y + side_statistic(prior, v));
}

GaussianObservationMoments gaussian_observation_moments(const JointPrior& prior, const Mat& q,
                                                        int order) {
  const int r = prior.dim();
  if (q.rows() != r || q.cols() != r) {
    throw ConfigError("second-moment map: Q must be dim x dim");
  }
  require_psd(q, "second-moment map Q");
  const Mat precision = total_precision(prior, q);
  const Mat root = psd_sqrt(precision);
  const bool observed = max_abs(precision) > 0.0;
  const TensorQuadrature& quad = observation_rule(prior, root, order);

  GaussianObservationMoments out{Mat::Zero(r, r), Mat::Zero(r, r)};
  Vec mean(r);
  for (const SideClass& cls : prior.side_classes()) {
    if (cls.probability <= 0.0) continue;
    TiltedPosterior post(prior, cls, precision);
    for (std::size_t k = 0; k < cls.atoms.size(); ++k) {
      const double wa = cls.probability * cls.weights[k];
      if (wa <= 0.0) continue;
      const Vec& theta = prior.atoms()[cls.atoms[k]].theta;
      if (!observed) {
        mean = post.mean(Vec::Zero(r));
        out.mean_second_moment += wa * mean * mean.transpose();
        out.error_covariance += wa * (theta - mean) * (theta - mean).transpose();
        continue;
      }
      const Vec base = precision * theta;
      if (r == 1) {
        const double rt = root(0, 0);
        double acc_mean = 0.0, acc_err = 0.0;
        for (std::size_t g = 0; g < quad.weights.size(); ++g) {
          const double m = post.mean_scalar(base(0) + rt * quad.nodes(0, g));
          acc_mean += quad.weights[g] * m * m;
          acc_err += quad.weights[g] * (theta(0) - m) * (theta(0) - m);
        }
        out.mean_second_moment(0, 0) += wa * acc_mean;
        out.error_covariance(0, 0) += wa * acc_err;
        continue;
      }
      for (std::size_t g = 0; g < quad.weights.size(); ++g) {
        mean = post.mean(base + root * quad.nodes.col(static_cast<Eigen::Index>(g)));
        const double w = wa * quad.weights[g];
        out.mean_second_moment += w * mean * mean.transpose();
        out.error_covariance += w * (theta - mean) * (theta - mean).transpose();
      }
    }
  }
  out.mean_second_moment = symmetrize(out.mean_second_moment);
  out.error_covariance = symmetrize(out.error_covariance);
  return out;
}

Mat v_second_moment(const JointPrior& prior, const Mat& q, int order) {
  return gaussian_observation_moments(prior, q, order).mean_second_moment;
}

double mmse_scalar(const JointPrior& prior, double tau2, int order) {
  if (prior.dim() != 1) throw ConfigError("mmse_scalar: prior must be scalar");
  if (std::isnan(tau2) || tau2 <= 0.0) throw DomainError("mmse_scalar: tau2 must be positive");
  const double q = std::isinf(tau2) ? 0.0 : 1.0 / tau2;
  return gaussian_observation_moments(prior, Mat::Constant(1, 1, q), order).error_covariance(0, 0);
}

}  // namespace gfomlb
