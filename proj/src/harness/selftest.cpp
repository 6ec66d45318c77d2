#include "harness/selftest.hpp"

#include <cmath>
#include <functional>

#include "amp_engine/bayes_amp.hpp"
#include "amp_engine/instance.hpp"
#include "amp_engine/iterate.hpp"
#include "amp_engine/onsager.hpp"
#include "amp_engine/se_check.hpp"
#include "applications/phase_retrieval.hpp"
#include "applications/spca.hpp"
#include "common/errors.hpp"
#include "harness/comparison.hpp"
#include "priors_channels/bayes.hpp"
#include "priors_channels/score.hpp"
#include "state_evolution/se.hpp"

namespace gfomlb {
namespace {

using Check = std::function<std::string()>;  // empty string on success

std::string expect_near(double got, double want, double tol, const char* what) {
  if (std::abs(got - want) <= tol) return "";
  return std::string(what) + " = " + std::to_string(got) + ", expected " + std::to_string(want);
}

std::vector<std::pair<std::string, Check>> checks() {
  std::vector<std::pair<std::string, Check>> out;
  const OutputChannel lin = linear_gauss_channel(0.5);
  const OutputChannel flat = uninformative_channel(1.0);

  out.push_back({"posterior mean of a point mass", [] {
    const JointPrior pm = JointPrior::point_mass(Vec::Constant(1, 1.7));
    return expect_near(posterior_mean(pm, Vec::Constant(1, -3.0), Mat::Constant(1, 1, 2.0),
                                      Vec::Zero(1))(0), 1.7, 1e-15, "mean");
  }});
  out.push_back({"two-point posterior mean at y = 0", [] {
    const JointPrior tp = JointPrior::symmetric_two_point(1.3);
    return expect_near(posterior_mean(tp, Vec::Zero(1), Mat::Constant(1, 1, 4.0), Vec::Zero(1))(0),
                       0.0, 1e-15, "mean");
  }});
  out.push_back({"mmse of a point mass", [] {
    return expect_near(mmse_scalar(JointPrior::point_mass(Vec::Constant(1, 2.0)), 0.3), 0.0, 1e-15, "mmse");
  }});
  out.push_back({"mmse without observation", [] {
    return expect_near(mmse_scalar(JointPrior::symmetric_two_point(1.0), kInf), 1.0, 1e-15, "mmse");
  }});
  out.push_back({"second-moment map at Q = 0", [] {
    return expect_near(max_abs(v_second_moment(JointPrior::symmetric_two_point(1.0), Mat::Zero(1, 1))),
                       0.0, 1e-14, "V");
  }});
  out.push_back({"second-moment map at large Q", [] {
    const JointPrior tp = JointPrior::three_point(2.0, 0.3);
    return expect_near(v_second_moment(tp, Mat::Constant(1, 1, 1e8))(0, 0), tp.second_moment()(0, 0),
                       1e-4, "V");
  }});
  out.push_back({"score of the uninformative channel", [flat] {
    return expect_near(score_expectation(flat, 0.7, 0.5).value, 0.0, 1e-15, "score");
  }});
  out.push_back({"regression SE with a point mass", [lin] {
    const JointPrior pm = JointPrior::point_mass(Vec::Constant(1, 1.0));
    const RegressionSEState s0 = se_regression_initial(pm, 2.0);
    const RegressionSEState s1 = se_regression_step(s0, pm, lin, 2.0);
    std::string e = expect_near(s0.tilde_tau2, 0.0, 1e-15, "tilde_tau2");
    if (e.empty()) e = expect_near(s0.sigma2, 0.5, 1e-15, "sigma2");
    if (e.empty() && !s1.perfect_knowledge) e = "perfect knowledge not reported";
    return e;
  }});
  out.push_back({"regression SE with the uninformative channel", [flat] {
    SeOptions o;
    o.t_max = 4;
    o.stop_on_convergence = false;
    const RegressionTrace tr = se_regression_run(JointPrior::symmetric_two_point(1.0), flat, 2.0, o);
    for (const auto& s : tr.states) {
      if (!std::isinf(s.tau2)) return std::string("tau2 finite at t = ") + std::to_string(s.t);
    }
    return std::string();
  }});
  out.push_back({"low-rank SE at the all-zero fixed point", [] {
    SeOptions o;
    o.t_max = 4;
    o.stop_on_convergence = false;
    const JointPrior tp = JointPrior::symmetric_two_point(1.0);
    const LowRankTrace tr = se_lowrank_run(tp, tp, 1.5, o);
    for (const auto& s : tr.states) {
      if (max_abs(s.Q) > 1e-14) return std::string("Q nonzero at t = ") + std::to_string(s.t);
    }
    return std::string();
  }});
  out.push_back({"all-zero GFOM rules", [lin] {
    const JointPrior tp = JointPrior::symmetric_two_point(1.0);
    const Instance inst = make_regression_instance(30, 20, tp, lin, 1);
    GfomSpec spec;
    auto zero_y = [](History, const Vec& y, const Mat&) { return Mat(Mat::Zero(y.size(), 1)); };
    auto zero_v = [](History, const Mat& v) { return Mat(Mat::Zero(v.rows(), 1)); };
    spec.F1 = {zero_y, zero_y, zero_y};
    spec.G1 = {nullptr, zero_v, zero_v};
    const GfomResult r = gfom_run(spec, inst, 3);
    for (const Mat& v : r.v) {
      if (max_abs(v) != 0.0) return std::string("nonzero iterate");
    }
    return r.multiplies == 5 ? std::string() : std::string("multiply count");
  }});
  out.push_back({"single multiply GFOM", [lin] {
    const JointPrior tp = JointPrior::symmetric_two_point(1.0);
    const Instance inst = make_regression_instance(30, 20, tp, lin, 2);
    GfomSpec spec;
    spec.F1 = {[](History, const Vec& y, const Mat&) { return Mat(y); }};
    const GfomResult r = gfom_run(spec, inst, 1);
    return expect_near(max_abs(r.v[0] - inst.X.transpose() * inst.y), 0.0, 0.0, "difference");
  }});
  out.push_back({"identity denoiser memory coefficient", [] {
    const JointPrior tp = JointPrior::symmetric_two_point(1.0);
    UpdateRuleSeq rules;
    rules.f.push_back({[](History, const Vec& y, const Mat&) { return Mat(Mat::Ones(y.size(), 1)); }, {}, {}});
    rules.f.push_back({[](History b, const Vec&, const Mat&) { return b.back(); }, {}, {}});
    rules.g.push_back({[](History a, const Mat&) { return a.back(); }, {}, {}});
    SeModel m{Model::lowrank, &tp, &tp, nullptr, 1.5};
    McOptions mc;
    mc.samples = 2000;
    auto [on, se] = onsager_coeffs(rules, m, 2, mc);
    return expect_near(on.zeta.get(1, 0)(0, 0), 1.0 / 1.5, 1e-9, "zeta");
  }});
  out.push_back({"Bayes AMP with a point mass", [lin] {
    const JointPrior pm = JointPrior::point_mass(Vec::Constant(1, 0.0));
    const BayesAmp ba = bayes_amp_lowrank(pm, JointPrior::symmetric_two_point(1.0), 1.5, 2);
    const Mat out = ba.rules.g_at(1).eval(std::vector<Mat>{Mat::Constant(4, 1, 3.0)}, Mat::Zero(4, 1));
    return expect_near(max_abs(out), 0.0, 1e-15, "g_1");
  }});
  out.push_back({"Bayes AMP with the uninformative channel", [flat] {
    const BayesAmp ba = bayes_amp_regression(JointPrior::symmetric_two_point(1.0), flat, 2.0, 2);
    const Mat f = ba.rules.f_at(0).eval(History(), Vec::LinSpaced(5, -2.0, 2.0), Mat::Zero(5, 1));
    return expect_near(max_abs(f), 0.0, 1e-12, "f_0");
  }});
  out.push_back({"constant test function", [lin] {
    const JointPrior tp = JointPrior::symmetric_two_point(1.0);
    const Instance inst = make_regression_instance(30, 20, tp, lin, 3);
    AmpSECoeffs c(1);
    const auto rows = empirical_se_check({}, inst, c, tp.second_moment(), {"one"});
    std::string e = expect_near(rows[0].empirical, 1.0, 0.0, "empirical");
    if (e.empty()) e = expect_near(rows[0].z, 0.0, 0.0, "z");
    return e;
  }});
  out.push_back({"second-moment map of SPCA at q = 0", [] {
    return expect_near(three_point_posterior_second_moment(std::sqrt(5.0), 0.2, 0.0), 0.0, 0.0, "V");
  }});
  out.push_back({"SPCA recursion without side information", [] {
    const SpcaTrace tr = spca_recursion({1.0, 0.2, 1.5, 0.0}, 20);
    for (double q : tr.q) {
      if (q != 0.0) return std::string("nonzero q");
    }
    return std::string();
  }});
  out.push_back({"SPCA bound at perfect knowledge", [] {
    return expect_near(spca_bound_from_q({2.0, 0.3, 1.5, 0.1}, 1e9), 1.0, 1e-6, "bound");
  }});
  out.push_back({"corollary gate", [] {
    return spca_corollary_constants(2.0, 1.0, 0.5).regime == "none" ? std::string()
                                                                    : std::string("regime should be none");
  }});
  out.push_back({"threshold of the uninformative channel", [flat] {
    return std::isinf(delta_sp(flat).value) ? std::string() : std::string("expected INF");
  }});
  out.push_back({"phase retrieval without side information", [] {
    PrConfig cfg{abs_gauss_channel(0.2), 0.4, 1.0, 0.0};
    const PrTrace tr = pr_recursion(cfg, 5);
    for (double q : tr.q) {
      if (q != 0.0) return std::string("nonzero q");
    }
    return std::string();
  }});
  out.push_back({"point-mass comparison", [] {
    nlohmann::json j = {{"model", "lowrank"}, {"n", 60}, {"p", 40}, {"t_star", 2}, {"seed_count", 2},
                        {"prior_theta", {{"kind", "point_mass"}, {"value", 1.0}}},
                        {"prior_lambda", {{"kind", "two_point"}, {"mu", 1.0}}},
                        {"test_functions", {"mse"}}};
    const RunRecord rec = run_comparison(parse_experiment_config(j), 1);
    for (const CompareRow& r : rec.rows) {
      if (r.empirical != 0.0 || r.predicted != 0.0) return std::string("nonzero mse");
    }
    return rec.rows.empty() ? std::string("no rows") : std::string();
  }});
  return out;
}

}  // namespace

SelftestResult run_selftest() {
  SelftestResult res;
  for (auto& [name, check] : checks()) {
    std::string err;
    try {
      err = check();
    } catch (const std::exception& e) {
      err = std::string("exception: ") + e.what();
    }
    if (err.empty()) {
      ++res.passed;
      res.lines.push_back("PASS " + name);
    } else {
      ++res.failed;
      res.lines.push_back("FAIL " + name + ": " + err);
    }
  }
  return res;
}

}  // namespace gfomlb
