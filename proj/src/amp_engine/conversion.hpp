#pragma once

#include <functional>
#include <vector>

#include "amp_engine/onsager.hpp"
#include "amp_engine/rules.hpp"

namespace gfomlb {

// AMP recursion whose iterates reproduce a GFOM exactly on every instance:
// v^t = varphi(t, a¹..aᵗ, v) and u^t = phi(t, b¹..bᵗ, y, u).
struct AmpConversion {
  UpdateRuleSeq rules;
  OnsagerCoeffs onsager;
  AmpSECoeffs se;
  McDiagnostics diagnostics;
  int t_max = 0;
  std::function<Mat(int t, History a, const Mat& v)> varphi;
  std::function<Mat(int t, History b, const Vec& y, const Mat& u)> phi;
};

// The Onsager coefficients are estimated under `model` (see OnsagerRecursion);
// the resulting AMP is valid for t_max iterations.
AmpConversion gfom_to_amp(const GfomSpec& spec, const SeModel& model, int t_max,
                          const McOptions& opts = {});

}  // namespace gfomlb
