#pragma once

// Command-line front end. Subcommands: analyze, witness, sweep, simulate,
// reconstruct, mc, bias, export-state.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gmecert {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitNumerical = 3 };

enum class WitnessMode { fixed, reoptimized };

struct SweepOptions {
  double p_min = 0.0;
  double p_max = 1.0;
  int steps = 11;
  WitnessMode mode = WitnessMode::reoptimized;
  bool two_body_only = true;
  double sdp_tolerance = 1e-8;
  bool simulate = false;
  double mean_pairs = 350;
  int samples = 100;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

struct SweepRecord {
  double p = 0;
  double beta[3] = {0, 0, 0};  // AB, BC, AC
  double witness_value = 0;
  bool has_std = false;
  double beta_std[3] = {0, 0, 0};
  double witness_std = 0;
  WitnessMode mode = WitnessMode::reoptimized;
};

/// One record per p on the uniform grid p_min .. p_max. In simulate mode
/// point i draws its data and resampling seeds from (seed, i).
std::vector<SweepRecord> run_sweep(const SweepOptions& options);

/// Body rows only; `#` comment lines are added by the CLI.
std::string sweep_csv(const std::vector<SweepRecord>& records);

/// args excludes the program name. Returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gmecert
