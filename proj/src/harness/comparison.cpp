#include "harness/comparison.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "amp_engine/bayes_amp.hpp"
#include "amp_engine/conversion.hpp"
#include "amp_engine/gfom_library.hpp"
#include "amp_engine/instance.hpp"
#include "amp_engine/iterate.hpp"
#include "amp_engine/se_check.hpp"
#include "common/errors.hpp"
#include "common/format.hpp"

namespace gfomlb {

std::vector<CompareRow> RunRecord::pooled() const {
  std::vector<CompareRow> out;
  for (const auto& r : rows) {
    if (r.seed == "pooled") out.push_back(r);
  }
  return out;
}

std::size_t RunRecord::count_rows(bool pooled_only) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const CompareRow& r) {
    return !pooled_only || r.seed == "pooled";
  }));
}

std::size_t RunRecord::count_within(double bound, bool pooled_only) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const CompareRow& r) {
    return (!pooled_only || r.seed == "pooled") && std::abs(r.z) <= bound;
  }));
}

namespace {

SeModel se_model(const ExperimentConfig& cfg) {
  SeModel m;
  m.model = cfg.model;
  m.theta = &*cfg.prior_theta;
  m.lambda = cfg.prior_lambda ? &*cfg.prior_lambda : nullptr;
  m.channel = cfg.channel ? &*cfg.channel : nullptr;
  m.delta = cfg.delta;
  return m;
}

GfomSpec library_spec(const ExperimentConfig& cfg) {
  const RuleParams& rp = cfg.rule_params;
  switch (cfg.rule_set) {
    case RuleSet::power_iter:
      return power_iteration_spec(cfg.t_star, cfg.prior_theta->dim(), rp.threshold, {rp.scale});
    case RuleSet::proximal:
      return proximal_gradient_spec(cfg.t_star, rp.step, rp.lambda);
    case RuleSet::custom:
      return clipped_polynomial_spec(cfg.t_star, rp.seed, cfg.prior_theta->dim(), rp.clip);
    case RuleSet::bayes:
      break;
  }
  throw ConfigError("rule_set: no GFOM for bayes");
}

std::string coefficient_csv(const AmpSECoeffs& se, const OnsagerCoeffs& on) {
  std::ostringstream out;
  out << "coef,s,t,row,col,value\n";
  auto emit = [&](const char* name, int s, int t, const Mat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out << name << ',' << s << ',' << t << ',' << i << ',' << j << ',' << format_double(m(i, j))
            << '\n';
      }
    }
  };
  for (const auto& [t, m] : se.alphas) emit("alpha", t, t, m);
  for (const auto& [t, m] : se.gammas) emit("gamma", t, t, m);
  for (const auto& [k, m] : se.T.blocks()) emit("T", k.first, k.second, m);
  for (const auto& [k, m] : se.Sigma.blocks()) emit("Sigma", k.first, k.second, m);
  for (const auto& [k, m] : on.xi.blocks()) emit("xi", k.first, k.second, m);
  for (const auto& [k, m] : on.zeta.blocks()) emit("zeta", k.first, k.second, m);
  return out.str();
}

struct SeedResult {
  std::vector<CompareRow> rows;
  bool multiply_ok = true;
  bool failed = false;
  SeedFailure failure;
};

CompareRow estimator_row(const std::string& fn, int t, const Vec& values, double predicted) {
  CompareRow row;
  row.fn = fn;
  row.t = t;
  const double n = static_cast<double>(values.size());
  row.empirical = values.mean();
  const double var = values.size() > 1 ? (values.array() - row.empirical).square().sum() / (n - 1.0) : 0.0;
  row.stderr_ = std::sqrt(var / n);
  row.predicted = predicted;
  row.z = z_score(row.empirical - predicted, row.stderr_);
  return row;
}

// ⟨θ̂, θ⟩ / (‖θ̂‖‖θ‖) with a delta-method standard error.
CompareRow overlap_row(int t, const Mat& est, const Mat& theta, double predicted) {
  const Vec cross = est.cwiseProduct(theta).rowwise().sum();
  const Vec est2 = est.rowwise().squaredNorm();
  const Vec theta2 = theta.rowwise().squaredNorm();
  const double a = cross.mean(), b = est2.mean(), c = theta2.mean();
  CompareRow row;
  row.fn = "overlap";
  row.t = t;
  row.predicted = predicted;
  if (!(b > 0.0) || !(c > 0.0)) {
    row.empirical = 0.0;
    row.stderr_ = 0.0;
  } else {
    const double root = std::sqrt(b * c);
    row.empirical = a / root;
    const Vec infl = (cross.array() / root - (row.empirical / 2.0) * (est2.array() / b + theta2.array() / c)).matrix();
    const double n = static_cast<double>(infl.size());
    const double m = infl.mean();
    const double var = infl.size() > 1 ? (infl.array() - m).square().sum() / (n - 1.0) : 0.0;
    row.stderr_ = std::sqrt(var / n);
  }
  row.z = z_score(row.empirical - predicted, row.stderr_);
  return row;
}

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::domain: return "domain";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
  }
  return "internal";
}

Instance make_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.model == Model::regression
             ? make_regression_instance(cfg.n, cfg.p, *cfg.prior_theta, *cfg.channel, seed)
             : make_lowrank_instance(cfg.n, cfg.p, *cfg.prior_theta, *cfg.prior_lambda, seed);
}

double row_mean(const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum() / double(a.rows()); }

SeedResult run_seed(const ExperimentConfig& cfg, const PreparedExperiment& prep, std::uint64_t seed,
                    int t_star) {
  SeedResult res;
  try {
    const Instance inst = make_instance(cfg, seed);
    const AmpResult amp = amp_run(prep.rules, prep.onsager, inst, t_star);
    res.multiply_ok = amp.multiplies == 2 * t_star - 1;
    for (const std::string& fn : cfg.test_functions) {
      if (!is_estimator_function(fn)) {
        for (const SeCheckRow& r : empirical_se_check(amp.a, inst, prep.se, prep.theta_moment, {fn})) {
          res.rows.push_back({"", r.t, r.fn, r.empirical, r.predicted, r.stderr_, r.z});
        }
        continue;
      }
      for (int t = 1; t <= t_star; ++t) {
        const Mat est = prep.rules.g_at(t).eval(History(amp.a).first(t), inst.v);
        if (fn == "mse") {
          const Vec err = (est - inst.theta).rowwise().squaredNorm();
          res.rows.push_back(estimator_row(fn, t, err, prep.predicted_mse.at(t)));
        } else {
          res.rows.push_back(overlap_row(t, est, inst.theta, prep.predicted_overlap.at(t)));
        }
      }
    }
    const std::string label = std::to_string(seed);
    for (auto& r : res.rows) r.seed = label;
  } catch (const Error& e) {
    res.failed = true;
    res.failure = {seed, kind_name(e.kind()), e.what()};
  } catch (const std::exception& e) {
    res.failed = true;
    res.failure = {seed, "internal", e.what()};
  }
  return res;
}

}  // namespace

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg) {
  PreparedExperiment prep;
  const SeModel model = se_model(cfg);
  prep.theta_moment = cfg.prior_theta->second_moment();
  const double moment = prep.theta_moment.trace();
  if (cfg.rule_set == RuleSet::bayes) {
    BayesAmp ba = cfg.model == Model::regression
                      ? bayes_amp_regression(*cfg.prior_theta, *cfg.channel, cfg.delta, cfg.t_star)
                      : bayes_amp_lowrank(*cfg.prior_theta, *cfg.prior_lambda, cfg.delta, cfg.t_star);
    prep.rules = std::move(ba.rules);
    prep.onsager = std::move(ba.onsager);
    prep.se = std::move(ba.se);
    prep.warnings = std::move(ba.warnings);
    prep.predicted_mse.assign(cfg.t_star + 1, NAN);
    prep.predicted_overlap.assign(cfg.t_star + 1, NAN);
    for (int t = 1; t <= prep.se.horizon; ++t) {
      double mse;
      if (cfg.model == Model::regression) {
        mse = cfg.delta * ba.regression_trace.states[t].tilde_tau2;
      } else {
        mse = moment - ba.lowrank_trace.states[t].v_theta.trace();
      }
      mse = std::max(mse, 0.0);
      prep.predicted_mse[t] = mse;
      prep.predicted_overlap[t] = moment > 0.0 ? std::sqrt(std::max(1.0 - mse / moment, 0.0)) : 0.0;
    }
    if (cfg.model == Model::regression) {
      prep.trace_csv = regression_trace_csv(ba.regression_trace,
                                            se_lower_bound_mse(ba.regression_trace, *cfg.prior_theta));
    } else {
      prep.trace_csv = lowrank_trace_csv(ba.lowrank_trace,
                                         se_lower_bound_mse(ba.lowrank_trace, *cfg.prior_theta));
    }
  } else {
    McOptions mc;
    mc.samples = cfg.mc_samples;
    mc.seed = cfg.mc_seed;
    AmpConversion conv = gfom_to_amp(library_spec(cfg), model, cfg.t_star, mc);
    prep.rules = std::move(conv.rules);
    prep.onsager = std::move(conv.onsager);
    prep.se = std::move(conv.se);
    prep.trace_csv = coefficient_csv(prep.se, prep.onsager);
  }
  return prep;
}

RunRecord run_comparison(const ExperimentConfig& cfg, int jobs) {
  RunRecord rec;
  rec.config = cfg.canonical;
  rec.config_hash = cfg.hash();
  const PreparedExperiment prep = prepare_experiment(cfg);
  rec.trace_csv = prep.trace_csv;
  rec.warnings = prep.warnings;

  const int t_star = std::min(cfg.t_star, prep.se.horizon);
  if (t_star < cfg.t_star) {
    rec.warnings.push_back("t_star reduced to " + std::to_string(t_star) + " (SE horizon)");
  }
  if (t_star < 1) throw NumericalError("state evolution horizon is empty");

  const std::size_t count = cfg.seeds.size();
  std::vector<SeedResult> results(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      results[i] = run_seed(cfg, prep, cfg.seeds[i], t_star);
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Deterministic fold in seed order.
  const std::vector<CompareRow>* layout = nullptr;
  for (const SeedResult& r : results) {
    if (r.failed) {
      rec.failures.push_back(r.failure);
      continue;
    }
    if (!layout) layout = &r.rows;
    rec.multiply_contract_ok = rec.multiply_contract_ok && r.multiply_ok;
    rec.rows.insert(rec.rows.end(), r.rows.begin(), r.rows.end());
  }
  if (!layout) return rec;
  for (std::size_t k = 0; k < layout->size(); ++k) {
    std::vector<double> values;
    for (const SeedResult& r : results) {
      if (!r.failed) values.push_back(r.rows[k].empirical);
    }
    const double m = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= m;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var = values.size() > 1 ? var / (m - 1.0) : 0.0;
    CompareRow row = (*layout)[k];
    row.seed = "pooled";
    row.empirical = mean;
    row.stderr_ = std::sqrt(var / m);
    row.z = z_score(mean - row.predicted, row.stderr_);
    rec.rows.push_back(row);
  }
  return rec;
}

SingleRun amp_run_table(const ExperimentConfig& cfg, std::uint64_t seed) {
  const PreparedExperiment prep = prepare_experiment(cfg);
  const int t_star = std::min(cfg.t_star, prep.se.horizon);
  if (t_star < 1) throw NumericalError("state evolution horizon is empty");
  const Instance inst = make_instance(cfg, seed);
  const AmpResult amp = amp_run(prep.rules, prep.onsager, inst, t_star);
  std::ostringstream out;
  out << "t,a_theta,a2,mse,overlap\n";
  for (int t = 1; t <= t_star; ++t) {
    const Mat& a = amp.a[t - 1];
    double mse = NAN, overlap = NAN;
    if (cfg.rule_set == RuleSet::bayes) {
      const Mat est = prep.rules.g_at(t).eval(History(amp.a).first(t), inst.v);
      mse = (est - inst.theta).squaredNorm() / double(inst.p());
      const double denom = est.norm() * inst.theta.norm();
      overlap = denom > 0.0 ? est.cwiseProduct(inst.theta).sum() / denom : 0.0;
    }
    out << t << ',' << format_double(row_mean(a, inst.theta)) << ',' << format_double(row_mean(a, a))
        << ',' << format_double(mse) << ',' << format_double(overlap) << '\n';
  }
  return {out.str(), amp.multiplies};
}

SingleRun gfom_run_table(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.rule_set == RuleSet::bayes) throw ConfigError("gfom-run: rule_set bayes has no GFOM form here");
  const GfomSpec spec = library_spec(cfg);
  const Instance inst = make_instance(cfg, seed);
  const GfomResult res = gfom_run(spec, inst, cfg.t_star);
  std::ostringstream out;
  out << "t,v_theta,v2,estimate_mse\n";
  const double mse = (res.theta_hat - inst.theta).squaredNorm() / double(inst.p());
  for (int t = 1; t <= cfg.t_star; ++t) {
    const Mat& v = res.v[t - 1];
    out << t << ',' << format_double(row_mean(v, inst.theta)) << ',' << format_double(row_mean(v, v))
        << ',' << format_double(t == cfg.t_star ? mse : NAN) << '\n';
  }
  return {out.str(), res.multiplies};
}

}  // namespace gfomlb
