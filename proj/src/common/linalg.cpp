#include "common/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "common/errors.hpp"

namespace gfomlb {

double min_eigenvalue(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void require_psd(const Mat& a, const char* what, double tol) {
  if (a.rows() != a.cols()) throw DomainError(std::string(what) + ": matrix is not square");
  if (!a.allFinite()) throw DomainError(std::string(what) + ": matrix has non-finite entries");
  const double scale = std::max(1.0, max_abs(a));
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw DomainError(std::string(what) + ": matrix is not symmetric");
  }
  const double lo = min_eigenvalue(a);
  if (lo < -tol) {
    throw DomainError(std::string(what) + ": matrix is not PSD (min eigenvalue " +
                      std::to_string(lo) + ")");
  }
}

Mat psd_sqrt(const Mat& a, double tol) {
  require_psd(a, "psd_sqrt", tol);
  if (a.rows() == 1) return Mat::Constant(1, 1, std::sqrt(std::max(a(0, 0), 0.0)));
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a));
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Mat psd_pinv(const Mat& a, double rel_tol) {
  if (a.size() == 0) return a;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a));
  const Vec& ev = es.eigenvalues();
  const double cutoff = rel_tol * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  Vec inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    inv(i) = (ev(i) > cutoff && ev(i) > 0.0) ? 1.0 / ev(i) : 0.0;
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace gfomlb
