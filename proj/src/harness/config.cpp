#include "harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "amp_engine/se_check.hpp"
#include "common/errors.hpp"
#include "common/format.hpp"

namespace gfomlb {

using nlohmann::json;

std::string rule_set_name(RuleSet r) {
  switch (r) {
    case RuleSet::bayes: return "bayes";
    case RuleSet::power_iter: return "power_iter";
    case RuleSet::proximal: return "proximal";
    case RuleSet::custom: return "custom";
  }
  return "bayes";
}

bool is_estimator_function(const std::string& name) { return name == "mse" || name == "overlap"; }

std::string ExperimentConfig::hash() const { return content_hash(canonical.dump()); }

namespace {

const std::set<std::string> kTopLevelKeys = {
    "name",    "model",          "n",       "p",          "delta",       "t_star",
    "seeds",   "seed_count",     "rule_set", "rule_params", "prior",      "prior_theta",
    "prior_lambda", "channel",   "spca",    "test_functions", "mc_samples", "mc_seed",
    "outputs"};

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config." + path + ": " + msg);
}

int positive_int(const json& j, const std::string& key) {
  if (!j.contains(key)) fail(key, "missing");
  const json& v = j[key];
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > (1LL << 30)) {
    fail(key, "must be a positive integer");
  }
  return v.get<int>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) fail(path + "." + key, "must be a number");
  return j[key].get<double>();
}

std::uint64_t uint_of(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(path, "must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

template <class F>
auto wrap(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  } catch (const DomainError& e) {
    fail(path, e.what());
  } catch (const json::exception& e) {
    fail(path, e.what());
  }
}

RuleSet parse_rule_set(const std::string& s) {
  if (s == "bayes") return RuleSet::bayes;
  if (s == "power_iter") return RuleSet::power_iter;
  if (s == "proximal") return RuleSet::proximal;
  if (s == "custom") return RuleSet::custom;
  fail("rule_set", "expected one of bayes, power_iter, proximal, custom");
}

json rule_params_json(const ExperimentConfig& c) {
  const RuleParams& r = c.rule_params;
  switch (c.rule_set) {
    case RuleSet::bayes: return json::object();
    case RuleSet::power_iter: return {{"threshold", r.threshold}, {"scale", r.scale}};
    case RuleSet::proximal: return {{"step", r.step}, {"lambda", r.lambda}};
    case RuleSet::custom: return {{"seed", r.seed}, {"clip", r.clip}};
  }
  return json::object();
}

void build_canonical(ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["model"] = model_name(c.model);
  j["n"] = c.n;
  j["p"] = c.p;
  j["delta"] = c.delta;
  j["t_star"] = c.t_star;
  j["seeds"] = c.seeds;
  j["rule_set"] = rule_set_name(c.rule_set);
  j["rule_params"] = rule_params_json(c);
  if (c.prior_theta) j["prior_theta"] = c.prior_theta->to_json();
  if (c.prior_lambda) j["prior_lambda"] = c.prior_lambda->to_json();
  if (c.channel) j["channel"] = channel_to_json(*c.channel);
  if (c.spca) j["spca"] = {{"mu", c.spca->mu}, {"eps", c.spca->eps}, {"alpha", c.spca->alpha}};
  j["test_functions"] = c.test_functions;
  j["mc_samples"] = c.mc_samples;
  j["mc_seed"] = c.mc_seed;
  j["outputs"] = c.outputs;
  c.canonical = std::move(j);
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kTopLevelKeys.count(it.key())) fail(it.key(), "unknown field");
  }
  ExperimentConfig c;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail("name", "must be a string");
    c.name = j["name"].get<std::string>();
  }
  if (!j.contains("model") || !j["model"].is_string()) fail("model", "missing or not a string");
  c.model = wrap("model", [&] { return parse_model(j["model"].get<std::string>()); });
  c.n = positive_int(j, "n");
  c.p = positive_int(j, "p");
  c.delta = number_or(j, "delta", double(c.n) / c.p, "");
  if (!(c.delta > 0.0) || !std::isfinite(c.delta)) fail("delta", "must be positive");
  if (std::abs(double(c.n) / c.p - c.delta) / c.delta > 0.01) {
    fail("delta", "n/p differs from delta by more than 1%");
  }
  c.t_star = positive_int(j, "t_star");
  if (c.t_star > 50) fail("t_star", "must be at most 50");

  if (j.contains("seeds") && j.contains("seed_count")) fail("seeds", "give seeds or seed_count, not both");
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array() || j["seeds"].empty()) fail("seeds", "must be a nonempty array");
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < j["seeds"].size(); ++i) {
      const std::uint64_t s = uint_of(j["seeds"][i], "seeds[" + std::to_string(i) + "]");
      if (!seen.insert(s).second) fail("seeds", "seeds must be distinct");
      c.seeds.push_back(s);
    }
  } else {
    const int count = j.contains("seed_count") ? positive_int(j, "seed_count") : 1;
    for (int s = 1; s <= count; ++s) c.seeds.push_back(static_cast<std::uint64_t>(s));
  }

  c.rule_set = RuleSet::bayes;
  if (j.contains("rule_set")) {
    if (!j["rule_set"].is_string()) fail("rule_set", "must be a string");
    c.rule_set = parse_rule_set(j["rule_set"].get<std::string>());
  }
  if (j.contains("rule_params")) {
    const json& rp = j["rule_params"];
    if (!rp.is_object()) fail("rule_params", "must be an object");
    c.rule_params.threshold = number_or(rp, "threshold", c.rule_params.threshold, "rule_params");
    c.rule_params.scale = number_or(rp, "scale", c.rule_params.scale, "rule_params");
    c.rule_params.step = number_or(rp, "step", c.rule_params.step, "rule_params");
    c.rule_params.lambda = number_or(rp, "lambda", c.rule_params.lambda, "rule_params");
    c.rule_params.clip = number_or(rp, "clip", c.rule_params.clip, "rule_params");
    if (rp.contains("seed")) c.rule_params.seed = uint_of(rp["seed"], "rule_params.seed");
  }
  if (c.rule_set == RuleSet::proximal && c.model != Model::regression) {
    fail("rule_set", "proximal requires the regression model");
  }

  if (j.contains("spca")) {
    if (c.model != Model::lowrank) fail("spca", "requires the lowrank model");
    if (j.contains("prior_theta") || j.contains("prior_lambda")) {
      fail("spca", "cannot be combined with explicit priors");
    }
    const json& s = j["spca"];
    if (!s.is_object()) fail("spca", "must be an object");
    SpcaConfig sc;
    sc.mu = number_or(s, "mu", NAN, "spca");
    sc.eps = number_or(s, "eps", NAN, "spca");
    sc.alpha = number_or(s, "alpha", 0.0, "spca");
    sc.delta = c.delta;
    wrap("spca", [&] { sc.validate(); return 0; });
    SpcaPriors priors = wrap("spca", [&] { return spca_priors(sc); });
    c.spca = sc;
    c.prior_theta = priors.theta;
    c.prior_lambda = priors.lambda;
  } else if (c.model == Model::lowrank) {
    if (!j.contains("prior_theta") || !j.contains("prior_lambda")) {
      fail("prior_theta", "lowrank needs prior_theta and prior_lambda (or an spca block)");
    }
    c.prior_theta = wrap("prior_theta", [&] { return JointPrior::from_json(j["prior_theta"]); });
    c.prior_lambda = wrap("prior_lambda", [&] { return JointPrior::from_json(j["prior_lambda"]); });
    if (c.prior_theta->dim() != c.prior_lambda->dim()) fail("prior_lambda", "dim must match prior_theta");
  } else {
    if (!j.contains("prior")) fail("prior", "missing");
    if (!j.contains("channel")) fail("channel", "missing");
    c.prior_theta = wrap("prior", [&] { return JointPrior::from_json(j["prior"]); });
    if (c.prior_theta->dim() != 1) fail("prior", "regression prior must be scalar");
    c.channel = wrap("channel", [&] {
      OutputChannel ch = make_channel(j["channel"]);
      validate_channel(ch);
      return ch;
    });
  }
  if (c.model == Model::regression && c.rule_set == RuleSet::power_iter) {
    fail("rule_set", "power_iter requires the lowrank model");
  }

  if (j.contains("test_functions")) {
    if (!j["test_functions"].is_array()) fail("test_functions", "must be an array of names");
    const auto builtins = builtin_test_functions();
    for (const json& f : j["test_functions"]) {
      if (!f.is_string()) fail("test_functions", "must be an array of names");
      const std::string name = f.get<std::string>();
      const bool known = std::find(builtins.begin(), builtins.end(), name) != builtins.end() ||
                         is_estimator_function(name);
      if (!known) fail("test_functions", "unknown function '" + name + "'");
      if (is_estimator_function(name) && c.rule_set != RuleSet::bayes) {
        fail("test_functions", "'" + name + "' needs rule_set bayes");
      }
      c.test_functions.push_back(name);
    }
  } else {
    c.test_functions = builtin_test_functions();
    if (c.rule_set == RuleSet::bayes) {
      c.test_functions.push_back("mse");
      c.test_functions.push_back("overlap");
    }
  }

  if (j.contains("mc_samples")) {
    const std::uint64_t m = uint_of(j["mc_samples"], "mc_samples");
    if (m < 1000) fail("mc_samples", "must be at least 1000");
    c.mc_samples = static_cast<std::size_t>(m);
  }
  if (j.contains("mc_seed")) c.mc_seed = uint_of(j["mc_seed"], "mc_seed");

  c.outputs = {{"trace", "trace.csv"}, {"compare", "compare.csv"}, {"summary", "summary.json"}};
  if (j.contains("outputs")) {
    const json& o = j["outputs"];
    if (!o.is_object()) fail("outputs", "must be an object");
    for (auto it = o.begin(); it != o.end(); ++it) {
      if (!c.outputs.count(it.key())) fail("outputs." + it.key(), "unknown output");
      if (!it.value().is_string()) fail("outputs." + it.key(), "must be a path string");
      c.outputs[it.key()] = it.value().get<std::string>();
    }
  }
  build_canonical(c);
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": invalid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

ExperimentConfig with_seed_count(const ExperimentConfig& cfg, int count) {
  if (count < 1) throw ConfigError("--seeds: must be positive");
  ExperimentConfig out = cfg;
  out.seeds.clear();
  for (int s = 1; s <= count; ++s) out.seeds.push_back(static_cast<std::uint64_t>(s));
  build_canonical(out);
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace gfomlb
