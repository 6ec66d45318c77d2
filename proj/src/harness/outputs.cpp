#include "harness/outputs.hpp"

#include <filesystem>
#include <sstream>

#include "common/errors.hpp"
#include "common/format.hpp"

namespace gfomlb {

std::string compare_csv(const RunRecord& rec) {
  std::ostringstream out;
  out << "seed,t,fn,empirical,predicted,z\n";
  for (const CompareRow& r : rec.rows) {
    out << r.seed << ',' << r.t << ',' << r.fn << ',' << format_double(r.empirical) << ','
        << format_double(r.predicted) << ',' << format_double(r.z) << '\n';
  }
  return out.str();
}

nlohmann::json summary_json(const RunRecord& rec) {
  nlohmann::json j;
  j["config"] = rec.config;
  j["config_hash"] = rec.config_hash;
  j["warnings"] = rec.warnings;
  nlohmann::json failures = nlohmann::json::array();
  for (const SeedFailure& f : rec.failures) {
    failures.push_back({{"seed", f.seed}, {"kind", f.kind}, {"message", f.message}});
  }
  j["failures"] = failures;
  j["multiply_contract_ok"] = rec.multiply_contract_ok;
  const std::size_t seed_rows = rec.count_rows(false) - rec.count_rows(true);
  const std::size_t seed_within = rec.count_within(3.0, false) - rec.count_within(3.0, true);
  j["rows_per_seed_total"] = seed_rows;
  j["rows_per_seed_abs_z_le_3"] = seed_within;
  j["rows_pooled_total"] = rec.count_rows(true);
  j["rows_pooled_abs_z_le_3"] = rec.count_within(3.0, true);
  double max_z = 0.0;
  for (const CompareRow& r : rec.pooled()) {
    if (std::isfinite(r.z)) max_z = std::max(max_z, std::abs(r.z));
  }
  j["max_abs_pooled_z"] = max_z;
  return j;
}

void write_run_outputs(const ExperimentConfig& cfg, const RunRecord& rec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& key) {
    fs::path p(cfg.outputs.at(key));
    if (p.is_relative() && !out_dir.empty()) p = fs::path(out_dir) / p;
    if (p.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(p.parent_path(), ec);
      if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "'");
    }
    return p.string();
  };
  write_text_file(resolve("trace"), rec.trace_csv);
  write_text_file(resolve("compare"), compare_csv(rec));
  write_text_file(resolve("summary"), summary_json(rec).dump(2) + "\n");
}

}  // namespace gfomlb
