#include "amp_engine/se_check.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace gfomlb {

std::vector<std::string> builtin_test_functions() {
  return {"one", "theta2", "a_theta", "a2", "a_cross"};
}

double z_score(double diff, double stderr_) {
  if (stderr_ > 0.0) return diff / stderr_;
  return diff == 0.0 ? 0.0 : NAN;
}

namespace {

SeCheckRow make_row(const std::string& fn, int t, const Vec& values, double predicted) {
  SeCheckRow row;
  row.fn = fn;
  row.t = t;
  const double n = static_cast<double>(values.size());
  row.empirical = values.mean();
  const double var = values.size() > 1
                         ? (values.array() - row.empirical).square().sum() / (n - 1.0)
                         : 0.0;
  row.stderr_ = std::sqrt(var / n);
  row.predicted = predicted;
  row.z = z_score(row.empirical - predicted, row.stderr_);
  return row;
}

Vec row_dot(const Mat& a, const Mat& b) { return a.cwiseProduct(b).rowwise().sum(); }

}  // namespace

std::vector<SeCheckRow> empirical_se_check(const std::vector<Mat>& a, const Instance& inst,
                                           const AmpSECoeffs& coeffs, const Mat& theta_moment,
                                           const std::vector<std::string>& functions) {
  const Eigen::Index p = inst.p();
  std::vector<SeCheckRow> rows;
  const int t_star = static_cast<int>(a.size());
  for (const std::string& fn : functions) {
    if (fn == "one") {
      rows.push_back(make_row(fn, 0, Vec::Ones(p), 1.0));
    } else if (fn == "theta2") {
      rows.push_back(make_row(fn, 0, row_dot(inst.theta, inst.theta), theta_moment.trace()));
    } else if (fn == "a_theta") {
      for (int t = 1; t <= t_star; ++t) {
        const double pred = (coeffs.alpha(t) * theta_moment).trace();
        rows.push_back(make_row(fn, t, row_dot(a[t - 1], inst.theta), pred));
      }
    } else if (fn == "a2") {
      for (int t = 1; t <= t_star; ++t) {
        const Mat al = coeffs.alpha(t);
        const double pred = (al * theta_moment * al.transpose()).trace() + coeffs.T.get(t, t).trace();
        rows.push_back(make_row(fn, t, row_dot(a[t - 1], a[t - 1]), pred));
      }
    } else if (fn == "a_cross") {
      for (int t = 2; t <= t_star; ++t) {
        const double pred =
            (coeffs.alpha(t - 1) * theta_moment * coeffs.alpha(t).transpose()).trace() +
            coeffs.T.get(t - 1, t).trace();
        rows.push_back(make_row(fn, t, row_dot(a[t - 2], a[t - 1]), pred));
      }
    } else {
      throw ConfigError("test_functions: unknown function '" + fn + "'");
    }
  }
  return rows;
}

}  // namespace gfomlb
