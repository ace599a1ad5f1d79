#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dealer/oligopoly.hpp"
#include "dealer/typelaw.hpp"

namespace dealer {

/// Bad configuration or unmet precondition of a run; exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { monopoly, oligopoly, verify, figures, sweep };

Mode parse_mode(const std::string& name);
std::string mode_name(Mode mode);

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitVerification = 4,
};

struct RunConfig {
  Mode mode = Mode::monopoly;

  double gamma_c = 1.0;
  double gamma_d = 0.0;
  int K = 2;
  /// Base case: S and M standard normal, so beta = 1/2.
  DistributionSpec distribution;
  /// When set (Gaussian only) sigma_S and sigma_M are re-split so that
  /// Var(Y) stays at its configured value and Cov(S,Y)/Var(Y) = beta.
  std::optional<double> beta;

  SolverConfig solver;

  std::string out_dir = ".";
  /// Empty names select <mode>_schedule.csv and <mode>_summary.json.
  std::string schedule_csv;
  std::string summary_json;
  /// Schedule samples written on [-sample_reach, sample_reach] without n = 0.
  int sample_points = 200;
  double sample_reach = 3.0;

  std::uint64_t seed = 20240611;
  int deviations = 20;
  std::size_t mc_samples = 1000000;

  /// Sweep over "beta", "gamma_d" or "K".
  std::string sweep_parameter = "beta";
  double sweep_from = 0.4;
  double sweep_to = 0.6;
  int sweep_points = 11;
};

/// Reads a key=value file with [market], [distribution], [solver], [output],
/// [verify] and [sweep] sections on top of the defaults. Unknown sections or
/// keys are rejected.
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Distribution after applying the beta override, if any.
DistributionSpec effective_distribution(const RunConfig& cfg);

/// Throws ConfigError when the configuration cannot be run.
void validate_config(const RunConfig& cfg);

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> artifacts;
};

/// Executes the configured mode and writes its artifacts into out_dir.
/// Failures are reported as a JSON object on `err` and mapped to exit codes.
RunResult run(const RunConfig& cfg, std::ostream& err);

/// Fixed-format number for CSV output: 17 significant digits, "nan"/"inf"
/// for non-finite values.
std::string format_number(double x);

}  // namespace dealer
