#pragma once

#include <string>
#include <vector>

#include "amp_engine/instance.hpp"
#include "state_evolution/coeffs.hpp"

namespace gfomlb {

// Built-in test functions ψ(a^t, Θ) averaged over coordinates:
//   one      1
//   theta2   ‖Θ‖²
//   a_theta  ⟨aᵗ, Θ⟩
//   a2       ‖aᵗ‖²
//   a_cross  ⟨a^{t-1}, aᵗ⟩  (t >= 2)
std::vector<std::string> builtin_test_functions();

struct SeCheckRow {
  std::string fn;
  int t = 0;
  double empirical = 0.0;
  double predicted = 0.0;
  double stderr_ = 0.0;  // within-run standard error of the empirical mean
  double z = 0.0;        // (empirical − predicted) / stderr
};

// Compares coordinate averages of the AMP iterates against their SE limits.
// `a` holds a¹..a^{t*}; rows run over functions in the given order, then t.
std::vector<SeCheckRow> empirical_se_check(const std::vector<Mat>& a, const Instance& inst,
                                           const AmpSECoeffs& coeffs, const Mat& theta_moment,
                                           const std::vector<std::string>& functions);

// z-score with a guard: stderr 0 gives 0 for an exact match and NaN otherwise.
double z_score(double diff, double stderr_);

}  // namespace gfomlb
