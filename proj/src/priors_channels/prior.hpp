#pragma once

#include <cstdint>
#include <json.hpp>
#include <vector>

#include "common/linalg.hpp"
#include "common/rng.hpp"

namespace gfomlb {

struct PriorAtom {
  Vec theta;
  Vec v;
};

// Atoms that share the same side-information value. `weights` are the
// conditional weights of those atoms given v.
struct SideClass {
  Vec v;
  double probability = 0.0;
  std::vector<int> atoms;
  std::vector<double> weights;
};

// Finite discrete law of (signal, side information) per coordinate.
//
// Side information is either the discrete v component of the atoms, or (when
// side_snr is nonzero) a Gaussian observation V = side_snr^{1/2} Θ + G' that
// is drawn alongside the atom. The Gaussian form requires every atom to carry
// the same discrete v.
class JointPrior {
 public:
  JointPrior(int dim, std::vector<PriorAtom> atoms, std::vector<double> weights,
             Mat side_snr = Mat());

  int dim() const { return dim_; }
  const std::vector<PriorAtom>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  bool has_gaussian_side() const { return gaussian_side_; }
  const Mat& side_snr() const { return side_snr_; }
  const Mat& side_snr_sqrt() const { return side_snr_sqrt_; }

  const std::vector<SideClass>& side_classes() const { return classes_; }
  // Class whose atoms are compatible with the observed side information `v`.
  const SideClass& class_for(const Vec& v) const;

  Vec mean() const;
  Mat second_moment() const;  // E[Θ Θᵀ]
  double second_moment_trace() const { return second_moment().trace(); }

  // Draws `count` iid coordinates; theta and v are count x dim.
  void sample(std::uint64_t seed, std::uint64_t stream, Eigen::Index count, Mat& theta,
              Mat& v) const;

  nlohmann::json to_json() const;

  // Accepts the explicit atom form or a builder object with a "kind" field
  // (point_mass, two_point, three_point, gaussian).
  static JointPrior from_json(const nlohmann::json& j);

  static JointPrior point_mass(const Vec& value);
  static JointPrior symmetric_two_point(double mu);
  // (1-eps) δ_0 + (eps/2)(δ_{+scale·mu} + δ_{-scale·mu}), scalar.
  static JointPrior three_point(double mu, double eps, double scale = 1.0, double side_snr = 0.0);
  // N(0, variance) discretized on Gauss-Hermite nodes.
  static JointPrior gaussian(int atoms, double variance = 1.0, double side_snr = 0.0);

 private:
  int dim_;
  std::vector<PriorAtom> atoms_;
  std::vector<double> weights_;
  Mat side_snr_;
  Mat side_snr_sqrt_;
  bool gaussian_side_ = false;
  std::vector<SideClass> classes_;
};

}  // namespace gfomlb
