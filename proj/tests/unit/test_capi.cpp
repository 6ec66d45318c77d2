#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "gfomlb/gfomlb.h"

namespace {

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  gfomlb_string_free(s);
  return out;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

const char* kTwoPoint = R"({"kind": "two_point", "mu": 1.0})";
const char* kLinear = R"({"name": "linear_gauss", "sigma": 0.5})";
const char* kExperiment = R"({
  "model": "regression", "n": 200, "p": 100, "t_star": 3, "seed_count": 2,
  "prior": {"kind": "two_point", "mu": 1.0},
  "channel": {"name": "linear_gauss", "sigma": 0.5},
  "mc_samples": 5000
})";

}  // namespace

TEST_CASE("prior and channel handles") {
  gfomlb_prior* prior = nullptr;
  REQUIRE(gfomlb_prior_from_json(kTwoPoint, &prior) == GFOMLB_OK);
  int dim = 0;
  CHECK(gfomlb_prior_dim(prior, &dim) == GFOMLB_OK);
  CHECK(dim == 1);
  double m2 = 0.0;
  CHECK(gfomlb_prior_second_moment_trace(prior, &m2) == GFOMLB_OK);
  CHECK(m2 == doctest::Approx(1.0));
  double mmse = 0.0;
  CHECK(gfomlb_mmse_scalar(prior, INFINITY, &mmse) == GFOMLB_OK);
  CHECK(mmse == doctest::Approx(1.0));
  CHECK(gfomlb_mmse_scalar(prior, 0.0, &mmse) == GFOMLB_ERR_DOMAIN);
  CHECK(std::strlen(gfomlb_last_error()) > 0);
  const double q = 2.0;
  double v = 0.0;
  CHECK(gfomlb_v_second_moment(prior, &q, &v) == GFOMLB_OK);
  CHECK(v == doctest::Approx(1.0 - [&] {
          double e = 0.0;
          gfomlb_mmse_scalar(prior, 0.5, &e);
          return e;
        }()));
  gfomlb_prior_free(prior);
  gfomlb_prior_free(nullptr);

  gfomlb_channel* channel = nullptr;
  REQUIRE(gfomlb_channel_from_json(kLinear, &channel) == GFOMLB_OK);
  double score = 0.0;
  CHECK(gfomlb_score_expectation(channel, 0.0, 1.0, &score) == GFOMLB_OK);
  CHECK(score == doctest::Approx(1.0 / 1.25).epsilon(1e-6));
  double dsp = 0.0;
  CHECK(gfomlb_delta_sp(channel, &dsp) == GFOMLB_ERR_DOMAIN);
  gfomlb_channel_free(channel);
}

TEST_CASE("bad input maps to status codes and a message") {
  gfomlb_prior* prior = nullptr;
  CHECK(gfomlb_prior_from_json("{not json", &prior) == GFOMLB_ERR_CONFIG);
  CHECK(prior == nullptr);
  CHECK(std::strlen(gfomlb_last_error()) > 0);
  CHECK(gfomlb_prior_from_json(R"({"kind": "nonsense"})", &prior) == GFOMLB_ERR_CONFIG);
  CHECK(gfomlb_prior_from_json(nullptr, &prior) == GFOMLB_ERR_CONFIG);
  CHECK(gfomlb_prior_from_json(kTwoPoint, nullptr) == GFOMLB_ERR_CONFIG);
  int dim = 0;
  CHECK(gfomlb_prior_dim(nullptr, &dim) == GFOMLB_ERR_CONFIG);
  gfomlb_experiment* exp = nullptr;
  CHECK(gfomlb_experiment_load("/nonexistent/experiment.json", &exp) == GFOMLB_ERR_IO);
  CHECK(gfomlb_experiment_from_json(R"({"model": "lowrank"})", &exp) == GFOMLB_ERR_CONFIG);
  // A successful call clears the message.
  REQUIRE(gfomlb_prior_from_json(kTwoPoint, &prior) == GFOMLB_OK);
  CHECK(std::string(gfomlb_last_error()).empty());
  gfomlb_prior_free(prior);
  CHECK(std::strlen(gfomlb_version()) > 0);
}

TEST_CASE("state evolution traces") {
  gfomlb_prior* prior = nullptr;
  gfomlb_channel* channel = nullptr;
  REQUIRE(gfomlb_prior_from_json(kTwoPoint, &prior) == GFOMLB_OK);
  REQUIRE(gfomlb_channel_from_json(kLinear, &channel) == GFOMLB_OK);
  gfomlb_se_trace* trace = nullptr;
  REQUIRE(gfomlb_se_regression(prior, channel, 2.0, 6, &trace) == GFOMLB_OK);
  int length = 0;
  CHECK(gfomlb_se_trace_length(trace, &length) == GFOMLB_OK);
  CHECK(length >= 2);
  double lb0 = 0.0, lb1 = 0.0;
  CHECK(gfomlb_se_trace_lower_bound(trace, 0, &lb0) == GFOMLB_OK);
  CHECK(gfomlb_se_trace_lower_bound(trace, 1, &lb1) == GFOMLB_OK);
  CHECK(lb0 == doctest::Approx(1.0));
  CHECK(lb1 < lb0);
  CHECK(gfomlb_se_trace_lower_bound(trace, length, &lb1) != GFOMLB_OK);
  char* csv = nullptr;
  CHECK(gfomlb_se_trace_csv(trace, &csv) == GFOMLB_OK);
  CHECK(count_lines(take(csv)) == length + 1);
  gfomlb_se_trace_free(trace);
  CHECK(gfomlb_se_regression(prior, channel, -1.0, 6, &trace) == GFOMLB_ERR_CONFIG);

  gfomlb_prior* lambda = nullptr;
  REQUIRE(gfomlb_prior_from_json(R"({"kind": "gaussian", "atoms": 21})", &lambda) == GFOMLB_OK);
  REQUIRE(gfomlb_se_lowrank(prior, lambda, 1.5, 5, &trace) == GFOMLB_OK);
  CHECK(gfomlb_se_trace_csv(trace, &csv) == GFOMLB_OK);
  CHECK(take(csv).rfind("t,Q_11,Qhat_11,lb_mse\n", 0) == 0);
  gfomlb_se_trace_free(trace);
  gfomlb_prior_free(lambda);
  gfomlb_channel_free(channel);
  gfomlb_prior_free(prior);
}

TEST_CASE("application tables") {
  char* csv = nullptr;
  REQUIRE(gfomlb_spca_bound_csv(std::sqrt(5.0), 0.2, 1.5, 0.1, 10, &csv) == GFOMLB_OK);
  const std::string spca = take(csv);
  CHECK(spca.rfind("mu,eps,delta,alpha,t,q_t,bound\n", 0) == 0);
  CHECK(count_lines(spca) == 12);
  double bound = 0.0;
  CHECK(gfomlb_spca_correlation_bound(std::sqrt(5.0), 0.2, 1.5, 0.1, 10, &bound) == GFOMLB_OK);
  CHECK(bound > 0.0);
  CHECK(bound <= 1.0);
  CHECK(gfomlb_spca_bound_csv(1.0, 1.5, 1.0, 0.1, 5, &csv) == GFOMLB_ERR_CONFIG);

  gfomlb_channel* channel = nullptr;
  REQUIRE(gfomlb_channel_from_json(R"({"name": "abs_gauss", "sigma": 0.2})", &channel) == GFOMLB_OK);
  double dsp = 0.0;
  CHECK(gfomlb_delta_sp(channel, &dsp) == GFOMLB_OK);
  CHECK(dsp == doctest::Approx(0.54072888).epsilon(1e-6));
  REQUIRE(gfomlb_pr_threshold_csv(channel, 0.9 * dsp, 1.0, 0.01, 8, &csv) == GFOMLB_OK);
  const std::string pr = take(csv);
  CHECK(pr.rfind("delta_sp,delta,eps,alpha,t,q_t,qhat_t,bound\n", 0) == 0);
  CHECK(count_lines(pr) == 10);
  gfomlb_channel_free(channel);
}

TEST_CASE("experiment lifecycle") {
  gfomlb_experiment* exp = nullptr;
  REQUIRE(gfomlb_experiment_from_json(kExperiment, &exp) == GFOMLB_OK);
  char* hash = nullptr;
  REQUIRE(gfomlb_experiment_hash(exp, &hash) == GFOMLB_OK);
  const std::string before = take(hash);
  CHECK(before.size() == 40);

  char* csv = nullptr;
  int multiplies = 0;
  REQUIRE(gfomlb_amp_run_csv(exp, 1, &csv, &multiplies) == GFOMLB_OK);
  CHECK(count_lines(take(csv)) == 4);
  CHECK(multiplies == 5);
  REQUIRE(gfomlb_amp_run_csv(exp, 1, &csv, nullptr) == GFOMLB_OK);
  gfomlb_string_free(csv);
  CHECK(gfomlb_gfom_run_csv(exp, 1, &csv, nullptr) == GFOMLB_ERR_CONFIG);

  gfomlb_run_record* rec = nullptr;
  REQUIRE(gfomlb_run_comparison(exp, 2, &rec) == GFOMLB_OK);
  int failures = -1;
  CHECK(gfomlb_run_record_failure_count(rec, &failures) == GFOMLB_OK);
  CHECK(failures == 0);
  CHECK(gfomlb_run_record_failure_status(rec) == GFOMLB_OK);
  REQUIRE(gfomlb_run_record_compare_csv(rec, &csv) == GFOMLB_OK);
  CHECK(take(csv).find("\npooled,") != std::string::npos);
  char* summary = nullptr;
  REQUIRE(gfomlb_run_record_summary_json(rec, &summary) == GFOMLB_OK);
  CHECK(take(summary).find(before) != std::string::npos);
  gfomlb_run_record_free(rec);

  CHECK(gfomlb_experiment_set_seed_count(exp, 0) == GFOMLB_ERR_CONFIG);
  REQUIRE(gfomlb_experiment_set_seed_count(exp, 3) == GFOMLB_OK);
  REQUIRE(gfomlb_experiment_hash(exp, &hash) == GFOMLB_OK);
  CHECK(take(hash) != before);
  gfomlb_experiment_free(exp);
  gfomlb_experiment_free(nullptr);
}

TEST_CASE("selftest through the C API") {
  char* report = nullptr;
  int failed = -1;
  REQUIRE(gfomlb_selftest(&report, &failed) == GFOMLB_OK);
  CHECK(failed == 0);
  CHECK(take(report).rfind("PASS ", 0) == 0);
}
