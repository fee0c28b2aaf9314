#pragma once
// Command-line front end: model construction from flags or a JSON config,
// and the potential / scan / resonance / validate / jost commands.
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "susyscat/feshbach.hpp"

namespace susyscat::cli {

enum ExitCode : int {
  exit_success = 0,
  exit_validation_failure = 1,
  exit_config_error = 2,
};

/// Bad flags, bad config file, or an unmet precondition. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { csv, json };

struct RunConfig {
  std::optional<double> delta;
  std::optional<double> e_r;
  std::optional<double> gamma;
  std::optional<double> kappa1;
  std::optional<double> kappa2;
  std::optional<double> beta;
  double e_min = 0.05;
  double e_max = 20.0;
  long points = 800;
  double r_max = 12.0;
  double step = 1e-3;
  std::string out;
  OutputFormat format = OutputFormat::csv;
  unsigned threads = 1;
  std::optional<double> seed_re;
  std::optional<double> seed_im;
  std::optional<double> energy;

  bool physical() const noexcept { return delta || e_r || gamma; }
  bool raw() const noexcept { return kappa1 || kappa2 || beta; }

  /// Checks the field invariants; throws ConfigError.
  void validate() const;
  /// Builds the model; construction failures are rethrown as ConfigError.
  feshbach::FeshbachParams model() const;
};

/// Reads a JSON object whose keys mirror the long flag names.
RunConfig load_config(const std::string& path);
/// Overlays the keys of `j` onto `config`; unknown keys are rejected.
void apply_json(RunConfig& config, const nlohmann::json& j);

/// Text of a command run together with its exit code.
struct CommandOutput {
  int exit_code = exit_success;
  std::string text;
};

CommandOutput cmd_potential(const RunConfig& config);
CommandOutput cmd_scan(const RunConfig& config);
CommandOutput cmd_resonance(const RunConfig& config);
CommandOutput cmd_validate(const RunConfig& config);
CommandOutput cmd_jost(const RunConfig& config);

/// Fixed 12-significant-digit rendering used in every output file.
std::string format_number(double value);

/// Scan energies, with points inside a threshold exclusion window moved
/// outward by the window width. `notes` receives one line per moved point.
std::vector<double> scan_energies(const RunConfig& config, const ChannelSet& channels,
                                  std::vector<std::string>* notes = nullptr);

/// Parses argv, runs the selected subcommand and writes its output. Returns the exit code.
int run(int argc, char** argv);

}  // namespace susyscat::cli
