#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amp_engine/onsager.hpp"
#include "amp_engine/rules.hpp"
#include "harness/config.hpp"

namespace gfomlb {

struct CompareRow {
  std::string seed;  // decimal seed, or "pooled"
  int t = 0;
  std::string fn;
  double empirical = 0.0;
  double predicted = 0.0;
  double stderr_ = 0.0;
  double z = 0.0;
};

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string kind;  // config, domain, numerical, internal
  std::string message;
};

struct RunRecord {
  std::string config_hash;
  nlohmann::json config;
  std::vector<CompareRow> rows;  // per seed (in seed order), then pooled
  std::vector<SeedFailure> failures;
  std::vector<std::string> warnings;
  std::string trace_csv;          // SE prediction table
  bool multiply_contract_ok = true;

  std::vector<CompareRow> pooled() const;
  std::size_t count_within(double bound, bool pooled_only) const;
  std::size_t count_rows(bool pooled_only) const;
};

// SE model and AMP ready to run on instances; shared read-only by workers.
struct PreparedExperiment {
  UpdateRuleSeq rules;
  OnsagerCoeffs onsager;
  AmpSECoeffs se;
  Mat theta_moment;
  std::vector<double> predicted_mse;      // index t (Bayes rule set)
  std::vector<double> predicted_overlap;  // index t (Bayes rule set)
  std::string trace_csv;
  std::vector<std::string> warnings;
};

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg);

// Runs every seed (up to `jobs` in parallel) and folds the results in seed
// order. A failing seed is recorded and excluded from pooling.
RunRecord run_comparison(const ExperimentConfig& cfg, int jobs = 1);

struct SingleRun {
  std::string csv;
  int multiplies = 0;
};

// One AMP run on the instance for `seed`: per-iterate coordinate averages
// t,a_theta,a2,mse,overlap (estimator columns are nan unless rule_set is bayes).
SingleRun amp_run_table(const ExperimentConfig& cfg, std::uint64_t seed);

// The GFOM behind a non-Bayes rule set run directly: t,v_theta,v2 per
// iterate; estimate_mse (of G_star) is filled on the last row only.
SingleRun gfom_run_table(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace gfomlb
