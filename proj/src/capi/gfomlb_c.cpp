#include "gfomlb/gfomlb.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "applications/phase_retrieval.hpp"
#include "applications/spca.hpp"
#include "common/errors.hpp"
#include "common/format.hpp"
#include "harness/comparison.hpp"
#include "harness/config.hpp"
#include "harness/outputs.hpp"
#include "harness/selftest.hpp"
#include "priors_channels/bayes.hpp"
#include "priors_channels/score.hpp"
#include "state_evolution/se.hpp"

struct gfomlb_prior {
  gfomlb::JointPrior value;
};
struct gfomlb_channel {
  gfomlb::OutputChannel value;
};
struct gfomlb_se_trace {
  std::vector<double> lower_bound;
  std::string csv;
};
struct gfomlb_experiment {
  gfomlb::ExperimentConfig value;
};
struct gfomlb_run_record {
  gfomlb::RunRecord value;
};

namespace {

thread_local std::string g_last_error;

gfomlb_status status_of(gfomlb::ErrorKind k) {
  switch (k) {
    case gfomlb::ErrorKind::config: return GFOMLB_ERR_CONFIG;
    case gfomlb::ErrorKind::domain: return GFOMLB_ERR_DOMAIN;
    case gfomlb::ErrorKind::numerical: return GFOMLB_ERR_NUMERICAL;
    case gfomlb::ErrorKind::io: return GFOMLB_ERR_IO;
  }
  return GFOMLB_ERR_INTERNAL;
}

template <class F>
gfomlb_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return GFOMLB_OK;
  } catch (const gfomlb::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return GFOMLB_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GFOMLB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return GFOMLB_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw gfomlb::ConfigError(std::string(what) + ": null pointer");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json parse_json(const char* text, const char* what) {
  require(text, what);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw gfomlb::ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

}  // namespace

extern "C" {

const char* gfomlb_last_error(void) { return g_last_error.c_str(); }

const char* gfomlb_version(void) { return "0.1.0"; }

void gfomlb_string_free(char* s) { std::free(s); }

gfomlb_status gfomlb_prior_from_json(const char* json, gfomlb_prior** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gfomlb_prior{gfomlb::JointPrior::from_json(parse_json(json, "prior"))};
  });
}

gfomlb_status gfomlb_prior_dim(const gfomlb_prior* prior, int* out) {
  return guarded([&] {
    require(prior, "prior");
    require(out, "out");
    *out = prior->value.dim();
  });
}

gfomlb_status gfomlb_prior_second_moment_trace(const gfomlb_prior* prior, double* out) {
  return guarded([&] {
    require(prior, "prior");
    require(out, "out");
    *out = prior->value.second_moment_trace();
  });
}

void gfomlb_prior_free(gfomlb_prior* prior) { delete prior; }

gfomlb_status gfomlb_channel_from_json(const char* json, gfomlb_channel** out) {
  return guarded([&] {
    require(out, "out");
    gfomlb::OutputChannel ch = gfomlb::make_channel(parse_json(json, "channel"));
    gfomlb::validate_channel(ch);
    *out = new gfomlb_channel{std::move(ch)};
  });
}

void gfomlb_channel_free(gfomlb_channel* channel) { delete channel; }

gfomlb_status gfomlb_mmse_scalar(const gfomlb_prior* prior, double tau2, double* out) {
  return guarded([&] {
    require(prior, "prior");
    require(out, "out");
    *out = gfomlb::mmse_scalar(prior->value, tau2);
  });
}

gfomlb_status gfomlb_v_second_moment(const gfomlb_prior* prior, const double* q, double* out) {
  return guarded([&] {
    require(prior, "prior");
    require(q, "q");
    require(out, "out");
    const int r = prior->value.dim();
    gfomlb::Mat qm(r, r);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) qm(i, j) = q[i * r + j];
    }
    const gfomlb::Mat v = gfomlb::v_second_moment(prior->value, qm);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) out[i * r + j] = v(i, j);
    }
  });
}

gfomlb_status gfomlb_score_expectation(const gfomlb_channel* channel, double sigma,
                                       double tilde_tau, double* out) {
  return guarded([&] {
    require(channel, "channel");
    require(out, "out");
    *out = gfomlb::score_expectation(channel->value, sigma, tilde_tau).value;
  });
}

gfomlb_status gfomlb_delta_sp(const gfomlb_channel* channel, double* out) {
  return guarded([&] {
    require(channel, "channel");
    require(out, "out");
    *out = gfomlb::delta_sp(channel->value).value;
  });
}

gfomlb_status gfomlb_se_regression(const gfomlb_prior* prior, const gfomlb_channel* channel,
                                   double delta, int t_max, gfomlb_se_trace** out) {
  return guarded([&] {
    require(prior, "prior");
    require(channel, "channel");
    require(out, "out");
    gfomlb::SeOptions opts;
    opts.t_max = t_max;
    const gfomlb::RegressionTrace tr =
        gfomlb::se_regression_run(prior->value, channel->value, delta, opts);
    auto lb = gfomlb::se_lower_bound_mse(tr, prior->value);
    std::string csv = gfomlb::regression_trace_csv(tr, lb);
    *out = new gfomlb_se_trace{std::move(lb), std::move(csv)};
  });
}

gfomlb_status gfomlb_se_lowrank(const gfomlb_prior* prior_theta, const gfomlb_prior* prior_lambda,
                                double delta, int t_max, gfomlb_se_trace** out) {
  return guarded([&] {
    require(prior_theta, "prior_theta");
    require(prior_lambda, "prior_lambda");
    require(out, "out");
    gfomlb::SeOptions opts;
    opts.t_max = t_max;
    const gfomlb::LowRankTrace tr =
        gfomlb::se_lowrank_run(prior_theta->value, prior_lambda->value, delta, opts);
    auto lb = gfomlb::se_lower_bound_mse(tr, prior_theta->value);
    std::string csv = gfomlb::lowrank_trace_csv(tr, lb);
    *out = new gfomlb_se_trace{std::move(lb), std::move(csv)};
  });
}

gfomlb_status gfomlb_se_trace_length(const gfomlb_se_trace* trace, int* out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    *out = static_cast<int>(trace->lower_bound.size());
  });
}

gfomlb_status gfomlb_se_trace_lower_bound(const gfomlb_se_trace* trace, int t, double* out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    if (t < 0 || t >= static_cast<int>(trace->lower_bound.size())) {
      throw gfomlb::ConfigError("t: outside the trace");
    }
    *out = trace->lower_bound[t];
  });
}

gfomlb_status gfomlb_se_trace_csv(const gfomlb_se_trace* trace, char** out) {
  return guarded([&] {
    require(trace, "trace");
    require(out, "out");
    *out = dup_string(trace->csv);
  });
}

void gfomlb_se_trace_free(gfomlb_se_trace* trace) { delete trace; }

gfomlb_status gfomlb_spca_bound_csv(double mu, double eps, double delta, double alpha, int t_max,
                                    char** out) {
  return guarded([&] {
    require(out, "out");
    if (t_max < 0) throw gfomlb::ConfigError("t: must be >= 0");
    const gfomlb::SpcaConfig cfg{mu, eps, delta, alpha};
    cfg.validate();
    const gfomlb::SpcaTrace tr = gfomlb::spca_recursion(cfg, t_max);
    std::ostringstream csv;
    csv << "mu,eps,delta,alpha,t,q_t,bound\n";
    for (int t = 0; t <= t_max; ++t) {
      csv << gfomlb::format_double(mu) << ',' << gfomlb::format_double(eps) << ','
          << gfomlb::format_double(delta) << ',' << gfomlb::format_double(alpha) << ',' << t << ','
          << gfomlb::format_double(tr.q[t]) << ','
          << gfomlb::format_double(gfomlb::spca_bound_from_q(cfg, tr.q[t])) << '\n';
    }
    *out = dup_string(csv.str());
  });
}

gfomlb_status gfomlb_spca_correlation_bound(double mu, double eps, double delta, double alpha,
                                            int t, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = gfomlb::spca_correlation_bound({mu, eps, delta, alpha}, t);
  });
}

gfomlb_status gfomlb_pr_threshold_csv(const gfomlb_channel* channel, double delta, double eps,
                                      double alpha, int t_max, char** out) {
  return guarded([&] {
    require(channel, "channel");
    require(out, "out");
    if (t_max < 1) throw gfomlb::ConfigError("t: must be >= 1");
    const gfomlb::DeltaSpResult ds = gfomlb::delta_sp(channel->value);
    const gfomlb::PrConfig cfg{channel->value, delta, eps, alpha};
    const gfomlb::PrTrace tr = gfomlb::pr_recursion(cfg, t_max);
    std::ostringstream csv;
    csv << "delta_sp,delta,eps,alpha,t,q_t,qhat_t,bound\n";
    for (int t = 0; t <= t_max; ++t) {
      csv << gfomlb::format_double(ds.value) << ',' << gfomlb::format_double(delta) << ','
          << gfomlb::format_double(eps) << ',' << gfomlb::format_double(alpha) << ',' << t << ','
          << gfomlb::format_double(tr.q[t]) << ',' << gfomlb::format_double(tr.qhat[t]) << ','
          << gfomlb::format_double(std::sqrt(std::max(tr.qhat[t], 0.0))) << '\n';
    }
    *out = dup_string(csv.str());
  });
}

gfomlb_status gfomlb_experiment_from_json(const char* json, gfomlb_experiment** out) {
  return guarded([&] {
    require(out, "out");
    *out = new gfomlb_experiment{gfomlb::parse_experiment_config(parse_json(json, "config"))};
  });
}

gfomlb_status gfomlb_experiment_load(const char* path, gfomlb_experiment** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new gfomlb_experiment{gfomlb::load_experiment_config(path)};
  });
}

gfomlb_status gfomlb_experiment_set_seed_count(gfomlb_experiment* exp, int count) {
  return guarded([&] {
    require(exp, "experiment");
    exp->value = gfomlb::with_seed_count(exp->value, count);
  });
}

gfomlb_status gfomlb_experiment_hash(const gfomlb_experiment* exp, char** out) {
  return guarded([&] {
    require(exp, "experiment");
    require(out, "out");
    *out = dup_string(exp->value.hash());
  });
}

void gfomlb_experiment_free(gfomlb_experiment* exp) { delete exp; }

gfomlb_status gfomlb_amp_run_csv(const gfomlb_experiment* exp, uint64_t seed, char** out,
                                 int* multiplies) {
  return guarded([&] {
    require(exp, "experiment");
    require(out, "out");
    const gfomlb::SingleRun run = gfomlb::amp_run_table(exp->value, seed);
    if (multiplies) *multiplies = run.multiplies;
    *out = dup_string(run.csv);
  });
}

gfomlb_status gfomlb_gfom_run_csv(const gfomlb_experiment* exp, uint64_t seed, char** out,
                                  int* multiplies) {
  return guarded([&] {
    require(exp, "experiment");
    require(out, "out");
    const gfomlb::SingleRun run = gfomlb::gfom_run_table(exp->value, seed);
    if (multiplies) *multiplies = run.multiplies;
    *out = dup_string(run.csv);
  });
}

gfomlb_status gfomlb_run_comparison(const gfomlb_experiment* exp, int jobs,
                                    gfomlb_run_record** out) {
  return guarded([&] {
    require(exp, "experiment");
    require(out, "out");
    *out = new gfomlb_run_record{gfomlb::run_comparison(exp->value, jobs)};
  });
}

gfomlb_status gfomlb_run_record_compare_csv(const gfomlb_run_record* rec, char** out) {
  return guarded([&] {
    require(rec, "record");
    require(out, "out");
    *out = dup_string(gfomlb::compare_csv(rec->value));
  });
}

gfomlb_status gfomlb_run_record_summary_json(const gfomlb_run_record* rec, char** out) {
  return guarded([&] {
    require(rec, "record");
    require(out, "out");
    *out = dup_string(gfomlb::summary_json(rec->value).dump(2) + "\n");
  });
}

gfomlb_status gfomlb_run_record_failure_count(const gfomlb_run_record* rec, int* out) {
  return guarded([&] {
    require(rec, "record");
    require(out, "out");
    *out = static_cast<int>(rec->value.failures.size());
  });
}

gfomlb_status gfomlb_run_record_failure_status(const gfomlb_run_record* rec) {
  if (!rec) return GFOMLB_ERR_CONFIG;
  gfomlb_status worst = GFOMLB_OK;
  for (const gfomlb::SeedFailure& f : rec->value.failures) {
    gfomlb_status s = GFOMLB_ERR_INTERNAL;
    if (f.kind == "config") s = GFOMLB_ERR_CONFIG;
    if (f.kind == "domain") s = GFOMLB_ERR_DOMAIN;
    if (f.kind == "numerical") s = GFOMLB_ERR_NUMERICAL;
    if (f.kind == "io") s = GFOMLB_ERR_IO;
    if (worst == GFOMLB_OK || s == GFOMLB_ERR_INTERNAL) worst = s;
  }
  return worst;
}

gfomlb_status gfomlb_run_record_write(const gfomlb_experiment* exp, const gfomlb_run_record* rec,
                                      const char* out_dir) {
  return guarded([&] {
    require(exp, "experiment");
    require(rec, "record");
    gfomlb::write_run_outputs(exp->value, rec->value, out_dir ? out_dir : "");
  });
}

void gfomlb_run_record_free(gfomlb_run_record* rec) { delete rec; }

gfomlb_status gfomlb_selftest(char** report, int* failed) {
  return guarded([&] {
    require(report, "report");
    const gfomlb::SelftestResult res = gfomlb::run_selftest();
    std::string text;
    for (const std::string& line : res.lines) text += line + "\n";
    text += std::to_string(res.passed) + " passed, " + std::to_string(res.failed) + " failed\n";
    if (failed) *failed = res.failed;
    *report = dup_string(text);
  });
}

}  // extern "C"
