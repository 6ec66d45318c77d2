#include "priors_channels/prior.hpp"

#include <cmath>
#include <string>

#include "common/errors.hpp"
#include "common/quadrature.hpp"

namespace gfomlb {
namespace {

using nlohmann::json;

Vec json_vector(const json& j, int dim, const std::string& path) {
  if (j.is_number()) {
    if (dim != 1) throw ConfigError(path + ": expected a vector of length " + std::to_string(dim));
    return Vec::Constant(1, j.get<double>());
  }
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(path + ": expected a vector of length " + std::to_string(dim));
  }
  Vec out(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: not a number");
    out(i) = j[i].get<double>();
  }
  return out;
}

Mat json_matrix(const json& j, int dim, const std::string& path) {
  if (j.is_number()) {
    return j.get<double>() * Mat::Identity(dim, dim);
  }
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(path + ": expected a number or a " + std::to_string(dim) + "x" +
                      std::to_string(dim) + " matrix");
  }
  Mat m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    m.row(i) = json_vector(j[i], dim, path + "[" + std::to_string(i) + "]").transpose();
  }
  return m;
}

json vector_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double number_field(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  if (!j[key].is_number()) throw ConfigError(path + "." + key + ": not a number");
  return j[key].get<double>();
}

double number_field_or(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(path + "." + key + ": not a number");
  return j[key].get<double>();
}

}  // namespace

JointPrior::JointPrior(int dim, std::vector<PriorAtom> atoms, std::vector<double> weights,
                       Mat side_snr)
    : dim_(dim), atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (dim_ < 1 || dim_ > 4) throw ConfigError("prior.dim: must be in 1..4");
  if (atoms_.empty()) throw ConfigError("prior.atoms: must be nonempty");
  if (atoms_.size() != weights_.size()) {
    throw ConfigError("prior.weights: length differs from prior.atoms");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& a = atoms_[i];
    if (a.theta.size() != dim_ || a.v.size() != dim_) {
      throw ConfigError("prior.atoms[" + std::to_string(i) + "]: vectors must have length dim");
    }
    if (!a.theta.allFinite() || !a.v.allFinite()) {
      throw ConfigError("prior.atoms[" + std::to_string(i) + "]: non-finite entry");
    }
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw ConfigError("prior.weights[" + std::to_string(i) + "]: must be nonnegative");
    }
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError("prior.weights: must sum to 1 (sum is " + std::to_string(total) + ")");
  }

  side_snr_ = side_snr.size() == 0 ? Mat::Zero(dim_, dim_) : side_snr;
  if (side_snr_.rows() != dim_ || side_snr_.cols() != dim_) {
    throw ConfigError("prior.side_snr: must be dim x dim");
  }
  try {
    side_snr_sqrt_ = psd_sqrt(side_snr_);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("prior.side_snr: ") + e.what());
  }
  gaussian_side_ = max_abs(side_snr_) > 0.0;

  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    SideClass* cls = nullptr;
    for (auto& c : classes_) {
      if (c.v == atoms_[i].v) {
        cls = &c;
        break;
      }
    }
    if (cls == nullptr) {
      classes_.push_back(SideClass{atoms_[i].v, 0.0, {}, {}});
      cls = &classes_.back();
    }
    cls->atoms.push_back(static_cast<int>(i));
    cls->probability += weights_[i];
  }
  for (auto& c : classes_) {
    for (int idx : c.atoms) {
      c.weights.push_back(c.probability > 0.0 ? weights_[idx] / c.probability : 0.0);
    }
  }
  if (gaussian_side_ && classes_.size() != 1) {
    throw ConfigError("prior.side_snr: Gaussian side information requires a common v across atoms");
  }
}

const SideClass& JointPrior::class_for(const Vec& v) const {
  if (gaussian_side_) return classes_.front();
  for (const auto& c : classes_) {
    if (c.v.size() == v.size() && (c.v - v).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + max_abs(v))) {
      return c;
    }
  }
  throw DomainError("side information outside prior support");
}

Vec JointPrior::mean() const {
  Vec m = Vec::Zero(dim_);
  for (std::size_t i = 0; i < atoms_.size(); ++i) m += weights_[i] * atoms_[i].theta;
  return m;
}

Mat JointPrior::second_moment() const {
  Mat m = Mat::Zero(dim_, dim_);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    m += weights_[i] * atoms_[i].theta * atoms_[i].theta.transpose();
  }
  return m;
}

void JointPrior::sample(std::uint64_t seed, std::uint64_t stream, Eigen::Index count, Mat& theta,
                        Mat& v) const {
  const auto cumulative = cumulative_weights(weights_);
  CounterRng pick_rng(seed, stream);
  CounterRng side_rng(seed, stream + 1);
  theta.resize(count, dim_);
  v.resize(count, dim_);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto& atom = atoms_[CounterRng::pick(cumulative, pick_rng.uniform(i))];
    theta.row(i) = atom.theta.transpose();
    v.row(i) = atom.v.transpose();
  }
  if (gaussian_side_) {
    Mat noise(count, dim_);
    side_rng.fill_normal(noise.data(), static_cast<std::size_t>(noise.size()));
    v = theta * side_snr_sqrt_ + noise;
  }
}

json JointPrior::to_json() const {
  json atoms = json::array();
  json weights = json::array();
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    atoms.push_back(json::array({vector_json(atoms_[i].theta), vector_json(atoms_[i].v)}));
    weights.push_back(weights_[i]);
  }
  json out = {{"dim", dim_}, {"atoms", atoms}, {"weights", weights}};
  if (gaussian_side_) {
    json rows = json::array();
    for (int i = 0; i < dim_; ++i) rows.push_back(vector_json(side_snr_.row(i).transpose()));
    out["side_snr"] = rows;
  }
  return out;
}

JointPrior JointPrior::from_json(const json& j) {
  const std::string path = "prior";
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  if (j.contains("kind")) {
    const std::string kind = j["kind"].get<std::string>();
    double side = number_field_or(j, "side_snr", 0.0, path);
    if (kind == "point_mass") {
      return point_mass(Vec::Constant(1, number_field(j, "value", path)));
    }
    if (kind == "two_point") return symmetric_two_point(number_field(j, "mu", path));
    if (kind == "three_point") {
      return three_point(number_field(j, "mu", path), number_field(j, "eps", path),
                         number_field_or(j, "scale", 1.0, path), side);
    }
    if (kind == "gaussian") {
      int atoms = static_cast<int>(number_field_or(j, "atoms", 41, path));
      return gaussian(atoms, number_field_or(j, "variance", 1.0, path), side);
    }
    throw ConfigError(path + ".kind: unknown prior kind '" + kind + "'");
  }

  if (!j.contains("dim") || !j["dim"].is_number_integer()) {
    throw ConfigError(path + ".dim: missing or not an integer");
  }
  const int dim = j["dim"].get<int>();
  if (!j.contains("atoms") || !j["atoms"].is_array()) {
    throw ConfigError(path + ".atoms: missing or not an array");
  }
  if (!j.contains("weights") || !j["weights"].is_array()) {
    throw ConfigError(path + ".weights: missing or not an array");
  }
  std::vector<PriorAtom> atoms;
  for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
    const json& a = j["atoms"][i];
    const std::string apath = path + ".atoms[" + std::to_string(i) + "]";
    if (!a.is_array() || a.size() != 2) throw ConfigError(apath + ": expected [theta, v]");
    atoms.push_back({json_vector(a[0], dim, apath + "[0]"), json_vector(a[1], dim, apath + "[1]")});
  }
  std::vector<double> weights;
  for (std::size_t i = 0; i < j["weights"].size(); ++i) {
    if (!j["weights"][i].is_number()) {
      throw ConfigError(path + ".weights[" + std::to_string(i) + "]: not a number");
    }
    weights.push_back(j["weights"][i].get<double>());
  }
  Mat side;
  if (j.contains("side_snr")) side = json_matrix(j["side_snr"], dim, path + ".side_snr");
  return JointPrior(dim, std::move(atoms), std::move(weights), side);
}

JointPrior JointPrior::point_mass(const Vec& value) {
  const int dim = static_cast<int>(value.size());
  return JointPrior(dim, {{value, Vec::Zero(dim)}}, {1.0});
}

JointPrior JointPrior::symmetric_two_point(double mu) {
  Vec z = Vec::Zero(1);
  return JointPrior(1, {{Vec::Constant(1, mu), z}, {Vec::Constant(1, -mu), z}}, {0.5, 0.5});
}

JointPrior JointPrior::three_point(double mu, double eps, double scale, double side_snr) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("three_point: eps must be in (0, 1]");
  if (!(mu > 0.0)) throw ConfigError("three_point: mu must be positive");
  Vec z = Vec::Zero(1);
  std::vector<PriorAtom> atoms = {{Vec::Constant(1, scale * mu), z},
                                  {Vec::Constant(1, -scale * mu), z}};
  std::vector<double> weights = {0.5 * eps, 0.5 * eps};
  if (eps < 1.0) {
    atoms.push_back({Vec::Zero(1), z});
    weights.push_back(1.0 - eps);
  }
  return JointPrior(1, std::move(atoms), std::move(weights), Mat::Constant(1, 1, side_snr));
}

JointPrior JointPrior::gaussian(int atoms, double variance, double side_snr) {
  if (atoms < 1) throw ConfigError("gaussian prior: atom count must be positive");
  if (!(variance > 0.0)) throw ConfigError("gaussian prior: variance must be positive");
  const auto& q = gauss_hermite(atoms);
  std::vector<PriorAtom> list;
  std::vector<double> weights;
  const double sd = std::sqrt(variance);
  for (int i = 0; i < atoms; ++i) {
    list.push_back({Vec::Constant(1, sd * q.nodes[i]), Vec::Zero(1)});
    weights.push_back(q.weights[i]);
  }
  return JointPrior(1, std::move(list), std::move(weights), Mat::Constant(1, 1, side_snr));
}

}  // namespace gfomlb
