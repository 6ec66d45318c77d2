#pragma once

#include <map>
#include <utility>

#include "common/errors.hpp"
#include "common/linalg.hpp"

namespace gfomlb {

// Sparse table of r x r blocks indexed by (s, t). Missing blocks read as zero.
// In symmetric mode get(t, s) returns get(s, t)ᵀ.
class BlockArray {
 public:
  explicit BlockArray(int dim = 1, bool symmetric = true) : dim_(dim), symmetric_(symmetric) {}

  int dim() const { return dim_; }

  void set(int s, int t, const Mat& block) {
    if (block.rows() != dim_ || block.cols() != dim_) {
      throw ConfigError("BlockArray: block has the wrong shape");
    }
    if (symmetric_ && s > t) {
      blocks_[{t, s}] = block.transpose();
    } else {
      blocks_[{s, t}] = block;
    }
  }

  bool has(int s, int t) const {
    if (symmetric_ && s > t) std::swap(s, t);
    return blocks_.count({s, t}) > 0;
  }

  Mat get(int s, int t) const {
    bool flip = symmetric_ && s > t;
    if (flip) std::swap(s, t);
    auto it = blocks_.find({s, t});
    if (it == blocks_.end()) return Mat::Zero(dim_, dim_);
    return flip ? Mat(it->second.transpose()) : it->second;
  }

  // Block matrix with block rows/cols for indices lo..hi inclusive.
  Mat assemble(int lo, int hi) const {
    const int count = hi - lo + 1;
    Mat out = Mat::Zero(count * dim_, count * dim_);
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < count; ++j) out.block(i * dim_, j * dim_, dim_, dim_) = get(lo + i, lo + j);
    }
    return out;
  }

  const std::map<std::pair<int, int>, Mat>& blocks() const { return blocks_; }

 private:
  int dim_;
  bool symmetric_;
  std::map<std::pair<int, int>, Mat> blocks_;
};

// Coefficients describing the Gaussian limit of AMP iterates:
// a^t ≈ α_t Θ + Z^t with Cov(Z^s, Z^t) = T_{s,t};
// b^t ≈ γ_t Λ + Z̃^t (low rank) or b^t ≈ B^t (regression) with Cov = Σ_{s,t}.
struct AmpSECoeffs {
  int dim = 1;
  int horizon = 0;  // largest t with α_t, T_{t,t} available
  std::map<int, Mat> alphas;
  std::map<int, Mat> gammas;
  BlockArray T{1, true};
  BlockArray Sigma{1, true};

  explicit AmpSECoeffs(int r = 1) : dim(r), T(r, true), Sigma(r, true) {}

  Mat alpha(int t) const {
    auto it = alphas.find(t);
    if (it == alphas.end()) throw ConfigError("SE coefficients: alpha_" + std::to_string(t) + " missing");
    return it->second;
  }
  Mat gamma(int t) const {
    auto it = gammas.find(t);
    if (it == gammas.end()) throw ConfigError("SE coefficients: gamma_" + std::to_string(t) + " missing");
    return it->second;
  }
};

}  // namespace gfomlb
