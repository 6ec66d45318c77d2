#pragma once

#include <vector>

#include "amp_engine/instance.hpp"
#include "amp_engine/rules.hpp"

namespace gfomlb {

// Wraps X and counts products with X or Xᵀ (one per call, whatever the width).
class DesignOperator {
 public:
  explicit DesignOperator(const Mat& x) : x_(x) {}

  Mat apply(const Mat& m);            // X m, m is p x r
  Mat apply_transpose(const Mat& m);  // Xᵀ m, m is n x r
  int multiplies() const { return multiplies_; }

 private:
  const Mat& x_;
  int multiplies_ = 0;
};

struct GfomResult {
  std::vector<Mat> v;  // v¹..v^{t*}, p x r
  std::vector<Mat> u;  // u¹..u^{t*-1}, n x r
  Mat theta_hat;
  int multiplies = 0;
};

// Runs t_star iterations of a GFOM (t_star v-iterates, 2 t_star − 1 products).
GfomResult gfom_run(const GfomSpec& spec, const Instance& inst, int t_star);

struct AmpResult {
  std::vector<Mat> a;  // a¹..a^{t*}
  std::vector<Mat> b;  // b¹..b^{t*-1}
  std::vector<Mat> f;  // f_0..f_{t*-1} outputs
  std::vector<Mat> g;  // g_1..g_{t*-1} outputs
  int multiplies = 0;
};

AmpResult amp_run(const UpdateRuleSeq& rules, const OnsagerCoeffs& onsager,
                  const Instance& inst, int t_star);

}  // namespace gfomlb
