#include "amp_engine/rules.hpp"

#include "common/errors.hpp"

namespace gfomlb {

std::string model_name(Model m) { return m == Model::regression ? "regression" : "lowrank"; }

Model parse_model(const std::string& name) {
  if (name == "regression") return Model::regression;
  if (name == "lowrank") return Model::lowrank;
  throw ConfigError("model: expected 'regression' or 'lowrank', got '" + name + "'");
}

const FRule& UpdateRuleSeq::f_at(int t) const {
  if (t < 0 || t >= static_cast<int>(f.size()) || !f[t].eval) {
    throw ConfigError("update rule f_" + std::to_string(t) + " missing");
  }
  return f[t];
}

const GRule& UpdateRuleSeq::g_at(int t) const {
  if (t < 1 || t > static_cast<int>(g.size()) || !g[t - 1].eval) {
    throw ConfigError("update rule g_" + std::to_string(t) + " missing");
  }
  return g[t - 1];
}

void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(what + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " output, got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  }
}

}  // namespace gfomlb
