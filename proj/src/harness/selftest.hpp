#pragma once

#include <string>
#include <vector>

namespace gfomlb {

struct SelftestResult {
  int passed = 0;
  int failed = 0;
  std::vector<std::string> lines;  // "PASS name" / "FAIL name: detail"
};

// Fast closed-form and degenerate-case checks across all modules.
SelftestResult run_selftest();

}  // namespace gfomlb
