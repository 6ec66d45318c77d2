#pragma once

#include <cstdint>
#include <vector>

#include "amp_engine/rules.hpp"

namespace gfomlb {

Mat soft_threshold(const Mat& x, double level);

// θ^{t+1} = c_t XᵀX η(θᵗ; level), started from the side information v
// (θ¹ = v). Iterate t of the GFOM is θᵗ. `scales` holds c_1, c_2, ...
// (the last entry repeats). Rules are defined for t < t_max.
GfomSpec power_iteration_spec(int t_max, int dim, double level,
                              std::vector<double> scales = {1.0});

// Proximal gradient on ½‖y − Xθ‖² + λ‖θ‖₁ with step size `step`, started
// from θ = 0: θ^{t+1} = prox(θᵗ + step·Xᵀ(y − Xθᵗ)). The GFOM iterate vᵗ is
// the pre-prox point.
GfomSpec proximal_gradient_spec(int t_max, double step, double lambda);

// Random rules that are polynomials of the latest iterates, y and v, clipped
// to [−clip, clip]. Deterministic in `seed`.
GfomSpec clipped_polynomial_spec(int t_max, std::uint64_t seed, int dim = 1, double clip = 3.0);

}  // namespace gfomlb
