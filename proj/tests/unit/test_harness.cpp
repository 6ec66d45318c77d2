#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <set>
#include <string>

#include "common/errors.hpp"
#include "harness/comparison.hpp"
#include "harness/config.hpp"
#include "harness/outputs.hpp"
#include "harness/selftest.hpp"

using namespace gfomlb;
using nlohmann::json;

namespace {

json small_regression() {
  return json::parse(R"({
    "name": "small",
    "model": "regression",
    "n": 300, "p": 150, "t_star": 4, "seed_count": 3,
    "prior": {"kind": "two_point", "mu": 1.0},
    "channel": {"name": "linear_gauss", "sigma": 0.5},
    "mc_samples": 20000
  })");
}

json small_spca() {
  return json::parse(R"({
    "model": "lowrank",
    "n": 300, "p": 200, "delta": 1.5, "t_star": 3, "seeds": [4, 9],
    "spca": {"mu": 2.0, "eps": 0.3, "alpha": 0.2}
  })");
}

// Message of the ConfigError raised while parsing, or "" when parsing succeeds.
std::string parse_error(const json& j) {
  try {
    parse_experiment_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

json with(json j, const std::string& key, const json& value) {
  j[key] = value;
  return j;
}

json without(json j, const std::string& key) {
  j.erase(key);
  return j;
}

bool contains(const std::string& text, const std::string& part) {
  return text.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  const json base = small_regression();
  CHECK(parse_error(base).empty());
  CHECK(contains(parse_error(with(base, "colour", 1)), "config.colour"));
  CHECK(contains(parse_error(without(base, "model")), "config.model"));
  CHECK(contains(parse_error(with(base, "model", "dense")), "config.model"));
  CHECK(contains(parse_error(with(base, "n", 3.5)), "config.n"));
  CHECK(contains(parse_error(with(base, "p", 0)), "config.p"));
  CHECK(contains(parse_error(with(base, "delta", 3.0)), "config.delta"));
  CHECK(contains(parse_error(with(base, "t_star", 51)), "config.t_star"));
  CHECK(contains(parse_error(with(base, "seeds", json::array({1, 2}))), "config.seeds"));
  CHECK(contains(parse_error(with(without(base, "seed_count"), "seeds", json::array({1, 1}))),
                 "config.seeds"));
  CHECK(contains(parse_error(with(base, "rule_set", "newton")), "config.rule_set"));
  CHECK(contains(parse_error(with(base, "rule_set", "power_iter")), "config.rule_set"));
  CHECK(contains(parse_error(with(base, "test_functions", json::array({"a4"}))),
                 "config.test_functions"));
  CHECK(contains(parse_error(with(with(base, "rule_set", "custom"), "test_functions",
                                  json::array({"mse"}))),
                 "config.test_functions"));
  CHECK(contains(parse_error(with(base, "mc_samples", 10)), "config.mc_samples"));
  CHECK(contains(parse_error(with(base, "outputs", json{{"plot", "x.png"}})), "config.outputs.plot"));
  CHECK(contains(parse_error(with(base, "prior", json{{"kind", "two_point"}, {"mu", "x"}})),
                 "config.prior"));
  CHECK(contains(parse_error(with(base, "channel", json{{"name", "cubic"}})), "config.channel"));
  CHECK(contains(parse_error(with(small_spca(), "model", "regression")), "config.spca"));
  CHECK(contains(parse_error(with(small_spca(), "rule_set", "proximal")), "config.rule_set"));
  CHECK_THROWS_AS(parse_experiment_config(json::array()), ConfigError);
  CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("config hash changes exactly when the described run changes") {
  const json base = small_regression();
  const std::string h = parse_experiment_config(base).hash();
  CHECK(h.size() == 40);
  CHECK(parse_experiment_config(base).hash() == h);
  // Spelling out defaults describes the same run.
  json explicit_defaults = with(base, "rule_set", "bayes");
  explicit_defaults["delta"] = 2.0;
  explicit_defaults["outputs"] = json{{"trace", "trace.csv"}};
  CHECK(parse_experiment_config(explicit_defaults).hash() == h);

  std::set<std::string> seen = {h};
  for (const json& changed :
       {with(base, "n", 302), with(base, "t_star", 5), with(base, "seed_count", 4),
        with(base, "mc_samples", 20001), with(base, "mc_seed", 3), with(base, "name", "other"),
        with(base, "channel", json{{"name", "linear_gauss"}, {"sigma", 0.6}}),
        with(base, "prior", json{{"kind", "two_point"}, {"mu", 1.1}}),
        with(base, "outputs", json{{"summary", "s.json"}})}) {
    CHECK(seen.insert(parse_experiment_config(changed).hash()).second);
  }
}

TEST_CASE("seed count override") {
  const ExperimentConfig cfg = with_seed_count(parse_experiment_config(small_spca()), 5);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  CHECK(cfg.hash() != parse_experiment_config(small_spca()).hash());
  CHECK_THROWS_AS(with_seed_count(cfg, 0), ConfigError);
}

TEST_CASE("comparison rows carry predictions and pooled z statistics") {
  const ExperimentConfig cfg = parse_experiment_config(small_regression());
  const RunRecord rec = run_comparison(cfg, 1);
  CHECK(rec.failures.empty());
  CHECK(rec.multiply_contract_ok);
  CHECK(rec.config_hash == cfg.hash());
  const auto pooled = rec.pooled();
  CHECK_FALSE(pooled.empty());
  // Every per-seed row has a pooled partner.
  CHECK(rec.rows.size() == pooled.size() * (cfg.seeds.size() + 1));
  for (const CompareRow& r : rec.rows) {
    CHECK(std::isfinite(r.predicted));
    if (r.fn == "one") {
      CHECK(r.empirical == 1.0);
      CHECK(r.z == 0.0);
    }
  }
  for (const CompareRow& r : pooled) CHECK(std::abs(r.z) < 5.0);
  CHECK(rec.count_rows(true) == pooled.size());
  CHECK(rec.count_within(kInf, false) == rec.rows.size());
}

TEST_CASE("comparison output does not depend on the worker count") {
  const ExperimentConfig cfg = parse_experiment_config(small_spca());
  const RunRecord one = run_comparison(cfg, 1);
  const RunRecord two = run_comparison(cfg, 2);
  CHECK(compare_csv(one) == compare_csv(two));
  CHECK(one.trace_csv == two.trace_csv);
  CHECK(summary_json(one).dump() == summary_json(two).dump());
  const std::string csv = compare_csv(one);
  CHECK(csv.rfind("seed,t,fn,empirical,predicted,z\n", 0) == 0);
  CHECK(contains(csv, "\n4,"));
  CHECK(contains(csv, "\n9,"));
  CHECK(contains(csv, "\npooled,"));
}

TEST_CASE("single runs report 2t - 1 products") {
  const ExperimentConfig bayes = parse_experiment_config(small_spca());
  const SingleRun amp = amp_run_table(bayes, 4);
  CHECK(amp.multiplies == 2 * bayes.t_star - 1);
  CHECK(amp.csv.rfind("t,a_theta,a2,mse,overlap\n", 0) == 0);

  json prox = small_regression();
  prox["rule_set"] = "proximal";
  prox["rule_params"] = json{{"step", 0.5}, {"lambda", 0.1}};
  const ExperimentConfig pcfg = parse_experiment_config(prox);
  const SingleRun direct = gfom_run_table(pcfg, 2);
  CHECK(direct.multiplies == 2 * pcfg.t_star - 1);
  CHECK_THROWS_AS(gfom_run_table(bayes, 1), ConfigError);
}

TEST_CASE("run outputs are written to the configured paths") {
  json j = small_spca();
  j["outputs"] = json{{"compare", "nested/cmp.csv"}};
  const ExperimentConfig cfg = parse_experiment_config(j);
  const RunRecord rec = run_comparison(cfg, 1);
  const auto dir = std::filesystem::temp_directory_path() / "gfomlb_harness_test";
  std::filesystem::remove_all(dir);
  // Missing directories are created.
  write_run_outputs(cfg, rec, dir.string());
  CHECK(read_text_file((dir / "nested/cmp.csv").string()) == compare_csv(rec));
  CHECK(read_text_file((dir / "trace.csv").string()) == rec.trace_csv);
  const json summary = json::parse(read_text_file((dir / "summary.json").string()));
  CHECK(summary == summary_json(rec));
  // A regular file where a directory should be.
  write_text_file((dir / "blocker").string(), "x");
  CHECK_THROWS_AS(write_run_outputs(cfg, rec, (dir / "blocker").string()), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("built-in selftest passes") {
  const SelftestResult res = run_selftest();
  CHECK(res.failed == 0);
  CHECK(res.passed > 0);
  CHECK(res.lines.size() == static_cast<std::size_t>(res.passed + res.failed));
}
