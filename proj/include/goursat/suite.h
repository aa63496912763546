#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace goursat {

struct CriterionResult {
  std::string id;  // AC1 .. AC12
  std::string description;
  std::string measured;
  std::string threshold;
  bool pass = false;
  double seconds = 0.0;
};

struct SuiteOptions {
  std::uint64_t seed = 7;
  // Scratch space for the determinism criterion; a temp directory when empty.
  std::string scratch_dir;
};

std::vector<std::string> criterion_ids();
CriterionResult run_criterion(const std::string& id, const SuiteOptions& options);
std::vector<CriterionResult> run_suite(const std::vector<std::string>& ids, const SuiteOptions& options);

// "AC4 PASS <description> | measured: ... | threshold: ..."
std::string summary_line(const CriterionResult& r);

}  // namespace goursat
