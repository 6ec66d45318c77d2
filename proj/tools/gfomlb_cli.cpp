#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "gfomlb/gfomlb.h"

namespace {

int exit_code(gfomlb_status s) {
  switch (s) {
    case GFOMLB_OK: return 0;
    case GFOMLB_ERR_CONFIG:
    case GFOMLB_ERR_DOMAIN:
    case GFOMLB_ERR_IO: return 2;
    case GFOMLB_ERR_NUMERICAL: return 3;
    default: return 1;
  }
}

// Raised to unwind out of a subcommand with a library status.
struct Failure {
  gfomlb_status status;
};

void check(gfomlb_status s) {
  if (s != GFOMLB_OK) throw Failure{s};
}

// Inline JSON if it looks like an object, otherwise a file to read.
std::string json_argument(const std::string& value) {
  const auto first = value.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && value[first] == '{') return value;
  std::ifstream in(value, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read '" << value << "'\n";
    throw Failure{GFOMLB_ERR_IO};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(char* text, const std::string& out_path) {
  std::string s(text);
  gfomlb_string_free(text);
  if (out_path.empty()) {
    std::cout << s;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << s)) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    throw Failure{GFOMLB_ERR_IO};
  }
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  ~Handle() { Free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lower bounds and message passing for first-order methods"};
  app.require_subcommand(1);

  std::string prior, prior_theta, prior_lambda, channel, config, out_path, out_dir;
  double delta = 0.0, delta_factor = 0.0, mu = 0.0, eps = 1.0, alpha = 0.0;
  int t_max = 50, seeds = 0;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed = 1;

  auto* se_reg = app.add_subcommand("se-regression", "State evolution for the regression model");
  se_reg->add_option("--prior", prior, "Prior JSON or file")->required();
  se_reg->add_option("--channel", channel, "Channel JSON or file")->required();
  se_reg->add_option("--delta", delta, "n/p ratio")->required();
  se_reg->add_option("--t-max", t_max, "Largest iteration")->capture_default_str();
  se_reg->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* se_lr = app.add_subcommand("se-lowrank", "State evolution for the low-rank model");
  se_lr->add_option("--prior-theta", prior_theta, "Prior JSON or file")->required();
  se_lr->add_option("--prior-lambda", prior_lambda, "Prior JSON or file")->required();
  se_lr->add_option("--delta", delta, "n/p ratio")->required();
  se_lr->add_option("--t-max", t_max, "Largest iteration")->capture_default_str();
  se_lr->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* spca = app.add_subcommand("spca-bound", "Correlation bound for sparse PCA");
  spca->add_option("--mu", mu, "Spike amplitude")->required();
  spca->add_option("--eps", eps, "Sparsity level")->required();
  spca->add_option("--delta", delta, "n/p ratio")->required();
  spca->add_option("--alpha", alpha, "Side information strength")->required();
  spca->add_option("--t", t_max, "Last iteration")->capture_default_str();
  spca->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* pr = app.add_subcommand("pr-threshold", "Phase retrieval threshold and recursion");
  pr->add_option("--channel", channel, "Channel JSON or file")->required();
  auto* pr_delta = pr->add_option("--delta", delta, "n/p ratio");
  auto* pr_factor = pr->add_option("--delta-factor", delta_factor, "delta as a multiple of delta_sp");
  pr_delta->excludes(pr_factor);
  pr->add_option("--eps", eps, "Sparsity level")->capture_default_str();
  pr->add_option("--alpha", alpha, "Side information strength")->capture_default_str();
  pr->add_option("--t", t_max, "Last iteration")->capture_default_str();
  pr->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* amp = app.add_subcommand("amp-run", "Run AMP for one seed of an experiment");
  amp->add_option("--config", config, "Experiment JSON file")->required();
  amp->add_option("--seed", seed, "Instance seed")->capture_default_str();
  amp->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* gfom = app.add_subcommand("gfom-run", "Run the GFOM for one seed of an experiment");
  gfom->add_option("--config", config, "Experiment JSON file")->required();
  gfom->add_option("--seed", seed, "Instance seed")->capture_default_str();
  gfom->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* cmp = app.add_subcommand("compare", "Compare AMP runs against state evolution");
  cmp->add_option("--config", config, "Experiment JSON file")->required();
  cmp->add_option("--seeds", seeds, "Use seeds 1..N instead of the config list");
  cmp->add_option("--jobs", jobs, "Parallel replicate workers")->capture_default_str();
  cmp->add_option("--out-dir", out_dir, "Directory for relative output paths");

  auto* self = app.add_subcommand("selftest", "Run the built-in quick checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    char* text = nullptr;
    if (*se_reg) {
      Handle<gfomlb_prior, gfomlb_prior_free> p;
      Handle<gfomlb_channel, gfomlb_channel_free> c;
      Handle<gfomlb_se_trace, gfomlb_se_trace_free> tr;
      check(gfomlb_prior_from_json(json_argument(prior).c_str(), &p.ptr));
      check(gfomlb_channel_from_json(json_argument(channel).c_str(), &c.ptr));
      check(gfomlb_se_regression(p.ptr, c.ptr, delta, t_max, &tr.ptr));
      check(gfomlb_se_trace_csv(tr.ptr, &text));
      emit(text, out_path);
    } else if (*se_lr) {
      Handle<gfomlb_prior, gfomlb_prior_free> pt, pl;
      Handle<gfomlb_se_trace, gfomlb_se_trace_free> tr;
      check(gfomlb_prior_from_json(json_argument(prior_theta).c_str(), &pt.ptr));
      check(gfomlb_prior_from_json(json_argument(prior_lambda).c_str(), &pl.ptr));
      check(gfomlb_se_lowrank(pt.ptr, pl.ptr, delta, t_max, &tr.ptr));
      check(gfomlb_se_trace_csv(tr.ptr, &text));
      emit(text, out_path);
    } else if (*spca) {
      check(gfomlb_spca_bound_csv(mu, eps, delta, alpha, t_max, &text));
      emit(text, out_path);
    } else if (*pr) {
      Handle<gfomlb_channel, gfomlb_channel_free> c;
      check(gfomlb_channel_from_json(json_argument(channel).c_str(), &c.ptr));
      if (pr_factor->count() > 0) {
        double dsp = 0.0;
        check(gfomlb_delta_sp(c.ptr, &dsp));
        delta = delta_factor * dsp;
      } else if (pr_delta->count() == 0) {
        std::cerr << "error: pr-threshold needs --delta or --delta-factor\n";
        return 2;
      }
      check(gfomlb_pr_threshold_csv(c.ptr, delta, eps, alpha, t_max, &text));
      emit(text, out_path);
    } else if (*amp || *gfom) {
      Handle<gfomlb_experiment, gfomlb_experiment_free> ex;
      int multiplies = 0;
      check(gfomlb_experiment_load(config.c_str(), &ex.ptr));
      if (*amp) {
        check(gfomlb_amp_run_csv(ex.ptr, seed, &text, &multiplies));
      } else {
        check(gfomlb_gfom_run_csv(ex.ptr, seed, &text, &multiplies));
      }
      emit(text, out_path);
      std::cerr << "matrix multiplies: " << multiplies << "\n";
    } else if (*cmp) {
      Handle<gfomlb_experiment, gfomlb_experiment_free> ex;
      Handle<gfomlb_run_record, gfomlb_run_record_free> rec;
      check(gfomlb_experiment_load(config.c_str(), &ex.ptr));
      if (seeds > 0) check(gfomlb_experiment_set_seed_count(ex.ptr, seeds));
      check(gfomlb_run_comparison(ex.ptr, static_cast<int>(jobs), &rec.ptr));
      check(gfomlb_run_record_write(ex.ptr, rec.ptr, out_dir.c_str()));
      int failures = 0;
      check(gfomlb_run_record_failure_count(rec.ptr, &failures));
      if (failures > 0) {
        std::cerr << "error: " << failures << " seed(s) failed; see summary.json\n";
        return exit_code(gfomlb_run_record_failure_status(rec.ptr));
      }
    } else if (*self) {
      int failed = 0;
      check(gfomlb_selftest(&text, &failed));
      emit(text, "");
      return failed == 0 ? 0 : 1;
    }
  } catch (const Failure& f) {
    const std::string msg = gfomlb_last_error();
    if (!msg.empty()) std::cerr << "error: " << msg << "\n";
    return exit_code(f.status);
  }
  return 0;
}
