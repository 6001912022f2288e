#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sintheta/bounds.hpp"
#include "sintheta/generators.hpp"

namespace sintheta {

struct Tolerances {
  double tol_orth = 1e-10;
  double tol_recon = 1e-12;
  double delta_gap_rel = 1e-8;
  double identity_base = 1e-9;   // identity tol = base * max(1, 1/gap_min)
  double series_tol = 1e-12;
  int series_kmax = 200;
  double equivalents_tol = 1e-10;
};

enum class NoiseLevelKind {
  entry_sigma,   // noise_level is the entrywise stddev
  gap_fraction,  // dA is rescaled so ||dA|| = noise_level * planted gap
};

struct GridRow {
  SpectrumSpec spectrum;
  IncoherenceMode mode = IncoherenceMode::haar;
  double mu = 2.0;
  NoiseLevelKind noise_kind = NoiseLevelKind::entry_sigma;
  double noise_level = 0.01;
  int trials = 10;
};

enum class TrialStatus { passed, failed, skipped };

/// One verified identity or exact-residual check inside a trial.
struct IdentityResidual {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  Index n = 0, m = 0, r = 0;
  double sigma = 0.0;
  TrialStatus status = TrialStatus::passed;
  std::string note;
  std::vector<BoundReport> reports;
  std::vector<IdentityResidual> residuals;
  double wall_ms = 0.0;
};

struct DominanceStat {
  int met = 0;        // trials where the assumptions held
  int dominated = 0;  // of those, trials where the bound dominated
};

struct ScalingPoint {
  Index n = 0;
  double median_measured = 0.0;
  double median_bound = 0.0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool rank_r_branch = true;
};

struct TightnessResult {
  double median_ratio_v_over_u = 0.0;       // measured sin(V) / sin(U)
  double frac_onesided_below_uniform = 0.0; // u-side bound < uniform bound
  double median_uniform_over_onesided = 0.0;
  int trials = 0;
};

struct CalibrationResult {
  bool feasible = false;
  double c1 = 0.0, c2 = 0.0;
  double rate = 0.0;
  double target = 0.0;
  int trials = 0;
};

struct SuiteSummary {
  std::string suite;
  int total = 0, passed = 0, failed = 0, skipped = 0;
  std::map<std::string, double> max_residuals;
  std::map<std::string, double> residual_allowances;
  std::map<std::string, DominanceStat> dominance;
  std::vector<std::string> failures;  // human-readable, with seeds
  std::optional<ScalingResult> scaling;
  std::optional<TightnessResult> tightness;
  std::optional<CalibrationResult> calibration;
  double wall_ms = 0.0;

  /// Hard assertions: no failed trials, every dominance-checked bound at
  /// 100% where assumptions held.
  bool hard_pass() const;
};

struct SuiteResult {
  SuiteSummary summary;
  std::vector<TrialRecord> records;
};

struct SuiteConfig {
  std::uint64_t master_seed = 20260810;
  int workers = 1;
  Tolerances tol;
  std::vector<GridRow> grid;
};

/// Per-trial verification of the exact angular formulae against the direct
/// cross terms, the series form, the Hadamard norm bounds (dominance +
/// tightness witness), the equivalent sin Theta expressions, and Weyl's bound.
/// Gap-violating rows are skipped with a reason; errors are aggregated, the
/// suite never aborts.
SuiteResult run_identity_suite(const SuiteConfig& config);

/// Per-trial evaluation of every bound calculator; deterministic theorems
/// must dominate on 100% of trials where their assumptions hold.
SuiteResult run_bound_suite(const SuiteConfig& config);

struct TightnessConfig {
  std::uint64_t master_seed = 20260810;
  int workers = 1;
  Tolerances tol;
  Index n = 50, m = 2000, r = 3;
  double sigma_factor = 42.0;  // sigma = gap / (sigma_factor * sqrt(max(n,m)))
  int trials = 100;
};

/// Wide-matrix study of the one-sided bounds: measures sin(V)/sin(U) and
/// how often the one-sided U bound beats the uniform bound.
SuiteResult run_tightness_study(const TightnessConfig& config);

struct ScalingConfig {
  std::uint64_t master_seed = 20260810;
  int workers = 1;
  Index r = 2;
  double mu = 1.5;
  IncoherenceMode mode = IncoherenceMode::incoherent;
  std::vector<Index> n_grid = {200, 400, 800, 1600};
  int trials = 50;
  double sigma_factor = 42.0;
  TailMode tail_mode = TailMode::zero;
  double tail_ratio = 0.99;
  double c1 = 1.0, c2 = 1.0;
};

/// Row-wise error vs n: medians of the l_{2,inf} error at the proof's
/// rotation on a dyadic n grid, plus the fitted log-log slope with a
/// confidence interval.
SuiteResult run_scaling_study(const ScalingConfig& config);

struct CalibrateConfig {
  std::uint64_t master_seed = 20260810;
  int workers = 1;
  std::string bound_id = "two_to_infinity";
  std::vector<GridRow> grid;   // empty -> default calibration grid
  std::vector<double> c_grid;  // empty -> powers of 2 in [1/16, 16]
  double target_rate = 0.95;
};

/// Grid-searches the smallest (c1, c2) achieving the target dominance rate.
/// Rejects bounds without free constants.
SuiteResult calibrate_constants(const CalibrateConfig& config);

/// The instance grid calibrate_constants falls back to when none is given.
std::vector<GridRow> default_calibration_grid();

/// Deterministic static-partition parallel map: fn(i) for i in [0, count),
/// each index owning its output slot. Results never depend on worker count.
void parallel_for_indexed(int count, int workers,
                          const std::function<void(int)>& fn);

/// Median of a copy (average of middle pair for even sizes).
double median(std::vector<double> values);

}  // namespace sintheta
