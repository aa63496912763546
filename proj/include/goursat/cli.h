#pragma once

#include <map>
#include <string>
#include <vector>

namespace goursat {

// Exit codes of the experiment driver.
enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitNumericalError = 3 };

// Environment variable that overrides the output directory (below --out).
constexpr const char* kOutputDirEnv = "GOURSAT_OUT_DIR";

struct ExperimentConfig {
  std::string command;
  std::map<std::string, std::string> values;  // resolved key=value settings
  std::string out_dir;
  unsigned threads = 1;
};

// Config file values, overridden by flags; unknown keys are rejected.
ExperimentConfig resolve_config(const std::string& command, const std::map<std::string, std::string>& file_values,
                                const std::map<std::string, std::string>& flag_values);

// Runs one command and writes its artifacts; throws on configuration or numerical errors.
int run(const ExperimentConfig& config);

// Full driver: parses arguments (without the program name), maps exceptions to exit codes.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace goursat
