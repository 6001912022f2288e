#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sintheta/suites.hpp"

namespace sintheta {

struct CsvOptions {
  // Wall times are omitted (written as 0) by default so that identical
  // config + seed produce byte-identical files.
  bool include_timing = false;
};

/// One CSV per suite; fixed column order:
///   seed,n,m,r,sigma,bound_name,bound,measured,dominated,assumptions_met,
///   residual,wall_ms
/// Bound rows carry nan in the residual column; residual rows put the
/// allowance in `bound`, the value in `measured` and `residual`, and the
/// pass verdict in `dominated`. Skipped trials emit a single
/// "skipped_<reason>" row. Doubles use 17 significant digits.
std::string suite_csv_string(const std::vector<TrialRecord>& records,
                             const CsvOptions& opts = {});

void emit_csv(const std::vector<TrialRecord>& records,
              const std::filesystem::path& path, const CsvOptions& opts = {});

}  // namespace sintheta
