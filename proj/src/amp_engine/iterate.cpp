#include "amp_engine/iterate.hpp"

#include "common/errors.hpp"

namespace gfomlb {

Mat DesignOperator::apply(const Mat& m) {
  ++multiplies_;
  return x_ * m;
}

Mat DesignOperator::apply_transpose(const Mat& m) {
  ++multiplies_;
  return x_.transpose() * m;
}

namespace {

void require_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) throw NumericalError(what + ": non-finite iterate");
}

template <class Rule>
const Rule* optional_rule(const std::vector<Rule>& rules, int t) {
  if (t < 0 || t >= static_cast<int>(rules.size()) || !rules[t]) return nullptr;
  return &rules[t];
}

template <class Rule>
const Rule& required_rule(const std::vector<Rule>& rules, int t, const char* name) {
  const Rule* r = optional_rule(rules, t);
  if (!r) throw ConfigError(std::string("GFOM rule ") + name + "_" + std::to_string(t) + " missing");
  return *r;
}

}  // namespace

GfomResult gfom_run(const GfomSpec& spec, const Instance& inst, int t_star) {
  if (t_star < 1) throw ConfigError("t_star: must be at least 1");
  const Eigen::Index n = inst.n(), p = inst.p();
  const int r = spec.dim;
  if (inst.dim() != r) throw ConfigError("GFOM dimension does not match the instance");
  DesignOperator op(inst.X);
  GfomResult out;
  const History none;

  Mat f = required_rule(spec.F1, 0, "F1")(none, inst.y, inst.u);
  require_shape(f, n, r, "F1_0");
  Mat v1 = op.apply_transpose(f);
  if (auto* f2 = optional_rule(spec.F2, 0)) {
    Mat extra = (*f2)(none, inst.v);
    require_shape(extra, p, r, "F2_0");
    v1 += extra;
  }
  require_finite(v1, "GFOM");
  out.v.push_back(std::move(v1));

  for (int t = 1; t < t_star; ++t) {
    Mat g = required_rule(spec.G1, t, "G1")(History(out.v), inst.v);
    require_shape(g, p, r, "G1_" + std::to_string(t));
    Mat ut = op.apply(g);
    if (auto* g2 = optional_rule(spec.G2, t)) {
      Mat extra = (*g2)(History(out.u), inst.y, inst.u);
      require_shape(extra, n, r, "G2_" + std::to_string(t));
      ut += extra;
    }
    require_finite(ut, "GFOM");
    out.u.push_back(std::move(ut));

    Mat ft = required_rule(spec.F1, t, "F1")(History(out.u), inst.y, inst.u);
    require_shape(ft, n, r, "F1_" + std::to_string(t));
    Mat vt = op.apply_transpose(ft);
    if (auto* f2 = optional_rule(spec.F2, t)) {
      Mat extra = (*f2)(History(out.v), inst.v);
      require_shape(extra, p, r, "F2_" + std::to_string(t));
      vt += extra;
    }
    require_finite(vt, "GFOM");
    out.v.push_back(std::move(vt));
  }
  out.theta_hat = spec.G_star ? spec.G_star(History(out.v), inst.v) : out.v.back();
  require_shape(out.theta_hat, p, r, "G_star");
  out.multiplies = op.multiplies();
  return out;
}

AmpResult amp_run(const UpdateRuleSeq& rules, const OnsagerCoeffs& onsager,
                  const Instance& inst, int t_star) {
  if (t_star < 1) throw ConfigError("t_star: must be at least 1");
  const Eigen::Index n = inst.n(), p = inst.p();
  const int r = rules.dim;
  if (inst.dim() != r) throw ConfigError("AMP dimension does not match the instance");
  DesignOperator op(inst.X);
  AmpResult out;

  Mat f0 = rules.f_at(0).eval(History(), inst.y, inst.u);
  require_shape(f0, n, r, "f_0");
  out.a.push_back(op.apply_transpose(f0));
  out.f.push_back(std::move(f0));
  require_finite(out.a.back(), "AMP");

  for (int t = 1; t < t_star; ++t) {
    Mat g = rules.g_at(t).eval(History(out.a), inst.v);
    require_shape(g, p, r, "g_" + std::to_string(t));
    Mat bt = op.apply(g);
    for (int s = 0; s < t; ++s) bt.noalias() -= out.f[s] * onsager.zeta.get(t, s).transpose();
    require_finite(bt, "AMP");
    out.g.push_back(std::move(g));
    out.b.push_back(std::move(bt));

    Mat ft = rules.f_at(t).eval(History(out.b), inst.y, inst.u);
    require_shape(ft, n, r, "f_" + std::to_string(t));
    Mat at = op.apply_transpose(ft);
    for (int s = 1; s <= t; ++s) at.noalias() -= out.g[s - 1] * onsager.xi.get(t, s).transpose();
    require_finite(at, "AMP");
    out.f.push_back(std::move(ft));
    out.a.push_back(std::move(at));
  }
  out.multiplies = op.multiplies();
  return out;
}

}  // namespace gfomlb
