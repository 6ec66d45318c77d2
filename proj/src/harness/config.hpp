#pragma once

#include <cstdint>
#include <map>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "amp_engine/rules.hpp"
#include "applications/spca.hpp"
#include "priors_channels/channel.hpp"
#include "priors_channels/prior.hpp"

namespace gfomlb {

enum class RuleSet { bayes, power_iter, proximal, custom };

std::string rule_set_name(RuleSet r);

struct RuleParams {
  double threshold = 0.0;  // power_iter soft threshold
  double scale = 1.0;      // power_iter c_t
  double step = 1.0;       // proximal step size
  double lambda = 0.1;     // proximal l1 weight
  std::uint64_t seed = 1;  // custom rule coefficients
  double clip = 3.0;       // custom clipping level
};

// One comparison experiment. Built by parse_experiment_config, which fills
// every default so that `canonical` describes the run completely.
struct ExperimentConfig {
  std::string name;
  Model model = Model::lowrank;
  int n = 0;
  int p = 0;
  double delta = 0.0;
  int t_star = 1;
  std::vector<std::uint64_t> seeds;
  RuleSet rule_set = RuleSet::bayes;
  RuleParams rule_params;
  std::optional<JointPrior> prior_theta;
  std::optional<JointPrior> prior_lambda;  // low rank
  std::optional<OutputChannel> channel;    // regression
  std::optional<SpcaConfig> spca;
  std::vector<std::string> test_functions;
  std::size_t mc_samples = 200000;
  std::uint64_t mc_seed = 0x5eed5eedULL;
  std::map<std::string, std::string> outputs;  // trace, compare, summary

  nlohmann::json canonical;

  // Git-style blob hash of the canonical JSON.
  std::string hash() const;
};

// Test functions evaluated on the estimator rather than on the AMP iterates.
bool is_estimator_function(const std::string& name);

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// Replaces the seed list with 1..count.
ExperimentConfig with_seed_count(const ExperimentConfig& cfg, int count);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gfomlb
