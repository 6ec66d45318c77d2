#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/linalg.hpp"
#include "state_evolution/coeffs.hpp"

namespace gfomlb {

enum class Model { regression, lowrank };

std::string model_name(Model m);
Model parse_model(const std::string& name);

// Rules act on whole iterate matrices (one row per coordinate) and must be
// row-wise: output row i may depend only on row i of each input.
using History = std::span<const Mat>;

// Rules on the n side: (b¹..bᵗ; y, u) -> n x r.
using YRule = std::function<Mat(History hist, const Vec& y, const Mat& u)>;
// Rules on the p side: (a¹..aᵗ; v) -> p x r.
using VRule = std::function<Mat(History hist, const Mat& v)>;

// Per-row Jacobian of a rule with respect to iterate s (1-based), flattened
// row-major: column a*r + b holds ∂out_a/∂in_b.
using YJacobian = std::function<Mat(History hist, const Vec& y, const Mat& u, int s)>;
using VJacobian = std::function<Mat(History hist, const Mat& v, int s)>;

struct FRule {
  YRule eval;
  YJacobian jacobian;  // optional
  std::optional<double> lipschitz_hint;
};

struct GRule {
  VRule eval;
  VJacobian jacobian;  // optional
  std::optional<double> lipschitz_hint;
};

// f_t for t >= 0 and g_t for t >= 1 (stored at g[t-1]).
struct UpdateRuleSeq {
  int dim = 1;
  std::vector<FRule> f;
  std::vector<GRule> g;

  const FRule& f_at(int t) const;
  const GRule& g_at(int t) const;
};

// Memory coefficients ξ_{t,s} (1 <= s <= t) and ζ_{t,s} (0 <= s < t).
struct OnsagerCoeffs {
  int dim = 1;
  BlockArray xi{1, false};
  BlockArray zeta{1, false};

  explicit OnsagerCoeffs(int r = 1) : dim(r), xi(r, false), zeta(r, false) {}
};

// Generalized first-order method. F1[t], F2[t] are used for t >= 0; G1[t],
// G2[t] for t >= 1 (index 0 unused). Missing F1/G1 entries are configuration
// errors; missing or empty F2/G2 entries contribute zero.
struct GfomSpec {
  std::string name;
  int dim = 1;
  std::vector<YRule> F1;
  std::vector<VRule> F2;
  std::vector<VRule> G1;
  std::vector<YRule> G2;
  VRule G_star;  // defaults to the last v iterate
};

// Throws ConfigError when `m` is not rows x cols.
void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const std::string& what);

}  // namespace gfomlb
