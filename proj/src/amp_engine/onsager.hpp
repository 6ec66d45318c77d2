#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "amp_engine/rules.hpp"
#include "priors_channels/channel.hpp"
#include "priors_channels/prior.hpp"
#include "state_evolution/coeffs.hpp"

namespace gfomlb {

// The statistical model an AMP recursion is analysed under.
struct SeModel {
  Model model = Model::regression;
  const JointPrior* theta = nullptr;
  const JointPrior* lambda = nullptr;      // low rank only
  const OutputChannel* channel = nullptr;  // regression only
  double delta = 1.0;

  int dim() const;
  void validate() const;
};

struct McOptions {
  std::size_t samples = 200000;
  std::uint64_t seed = 0x5eed5eedULL;
  double fd_step = 1e-4;  // relative to the rms of the perturbed input
};

// Monte Carlo standard errors of the estimated coefficients.
struct McDiagnostics {
  std::map<int, Mat> alpha;  // α_t
  std::map<int, Mat> T;      // T_{t,t}
  std::map<int, Mat> xi;     // ξ_{t,t}
  std::map<int, Mat> zeta;   // ζ_{t,t-1}
};

// Builds the Onsager coefficients and SE coefficients of an AMP recursion one
// rule at a time, estimating every expectation by Monte Carlo over the SE
// limit (common random numbers across all steps). Analytic Jacobians are used
// when a rule provides one, central differences otherwise.
//
// Call order: start(f_0), then advance_g(1), advance_f(1), advance_g(2), ...
class OnsagerRecursion {
 public:
  OnsagerRecursion(const SeModel& model, int dim, const McOptions& opts = {});

  void start(const FRule& f0);
  void advance_g(int t, const GRule& g);
  void advance_f(int t, const FRule& f);

  int horizon() const { return se_.horizon; }
  const OnsagerCoeffs& onsager() const { return onsager_; }
  const AmpSECoeffs& se() const { return se_; }
  const McDiagnostics& diagnostics() const { return diag_; }

 private:
  Mat sample_block(const BlockArray& cov, int first, int last, std::uint64_t stream);
  Mat mean_jacobian_g(const GRule& g, int s, Mat* stderr_out);
  Mat mean_jacobian_f(const FRule& f, int s, Mat* stderr_out);
  void record_f(int t, const YRule& rule, Mat out);

  SeModel model_;
  int dim_;
  McOptions opts_;
  Eigen::Index count_;

  OnsagerCoeffs onsager_;
  AmpSECoeffs se_;
  McDiagnostics diag_;

  // p side
  Mat theta_, v_;
  std::vector<Mat> a_;      // a¹..aᵗ
  std::vector<Mat> g_out_;  // g_1..g_t
  std::vector<Mat> a_eps_;

  // n side
  Mat lambda_, u_;
  Vec y_;
  Mat b0_;                  // regression: B^0
  Vec noise_;               // regression: W
  std::vector<Mat> b_;      // b¹..bᵗ
  std::vector<Mat> f_out_;  // f_0..f_t
  std::vector<Mat> b_eps_;
  int next_g_ = 1;
  int next_f_ = 0;
};

std::pair<OnsagerCoeffs, AmpSECoeffs> onsager_coeffs(const UpdateRuleSeq& rules,
                                                     const SeModel& model, int t_max,
                                                     const McOptions& opts = {},
                                                     McDiagnostics* diagnostics = nullptr);

// Lower-triangular L with L Lᵀ = a for symmetric PSD a; zero pivots give zero
// columns. Throws NumericalError("SE covariance degenerate") on a pivot below
// −1e-6 relative to the largest diagonal entry.
Mat psd_cholesky(const Mat& a);

}  // namespace gfomlb
