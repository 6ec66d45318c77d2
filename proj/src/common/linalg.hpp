#pragma once

#include <Eigen/Dense>
#include <limits>

namespace gfomlb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Eigenvalues at or above -kPsdTolerance are accepted as PSD and clamped to zero.
inline constexpr double kPsdTolerance = 1e-10;

double min_eigenvalue(const Mat& a);

// Throws DomainError naming `what` when `a` is not symmetric PSD within tolerance.
void require_psd(const Mat& a, const char* what, double tol = kPsdTolerance);

Mat psd_sqrt(const Mat& a, double tol = kPsdTolerance);

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix; eigenvalues below
// rel_tol * max eigenvalue are treated as zero.
Mat psd_pinv(const Mat& a, double rel_tol = 1e-12);

Mat symmetrize(const Mat& a);

double max_abs(const Mat& a);

}  // namespace gfomlb
