#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sintheta/suites.hpp"

namespace sintheta {

/// Optional matrix-file inputs for single-instance runs.
struct FileInputs {
  std::string a, da, atilde, e;
  Index rank = 0;
  double sigma = 0.0;  // generated noise when e/da is not supplied

  bool any() const { return !a.empty(); }
};

/// Effective run configuration. Precedence: flags > config file > environment
/// (SINTHETA_OUT for the output directory) > built-in defaults. The effective
/// configuration is echoed into the output directory; echo + seed determine
/// every emitted number.
struct CliConfig {
  std::string subcommand;
  std::uint64_t seed = 20260810;
  std::string out_dir;
  int workers = 1;
  int trials_override = 0;   // 0 = keep per-row counts
  double tol_override = 0.0; // 0 = keep identity_base
  bool timing = false;       // real wall_ms in CSV breaks byte reproducibility
  Tolerances tol;
  std::vector<GridRow> grid;
  TightnessConfig tightness;
  ScalingConfig scaling;
  CalibrateConfig calibrate;
  FileInputs inputs;
  std::string config_path;
};

/// Parses argv (subcommand + flags), merges an optional JSON config file,
/// applies env/default fallbacks and the --trials/--tol overrides.
/// Throws ConfigError with a field-level message on schema violations.
CliConfig parse_config(int argc, const char* const* argv);

/// Applies a JSON config file onto cfg (file < flags, so call before flag
/// overrides are re-applied; parse_config handles the ordering).
void merge_config_file(CliConfig& cfg, const std::string& path);

/// Serialized effective configuration (the provenance echo).
std::string config_echo_json(const CliConfig& cfg);

void write_config_echo(const CliConfig& cfg);

/// Runs the configured subcommand. Exit codes: 0 all hard assertions pass,
/// 1 usage/IO error, 2 assertion failure (identity residual above tolerance
/// or a deterministic bound losing dominance).
int dispatch(const CliConfig& cfg);

}  // namespace sintheta
