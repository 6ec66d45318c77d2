#pragma once

#include <json.hpp>
#include <string>

#include "harness/comparison.hpp"

namespace gfomlb {

// seed,t,fn,empirical,predicted,z with shortest round-trip numbers.
std::string compare_csv(const RunRecord& rec);

// Config, hash, failures, warnings and aggregate z statistics. No timings,
// so repeated runs produce identical files.
nlohmann::json summary_json(const RunRecord& rec);

// Writes the outputs named in the config, resolving relative paths against
// `out_dir` (empty means the working directory).
void write_run_outputs(const ExperimentConfig& cfg, const RunRecord& rec, const std::string& out_dir);

}  // namespace gfomlb
