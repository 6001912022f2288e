#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sintheta/suites.hpp"

namespace sintheta {

/// Plain-text run report: per-suite PASS/FAIL, trial counts, worst residuals,
/// dominance rates, fitted slopes and calibrated constants, plus a pointer to
/// the config echo for reproduction.
std::string render_report(const std::vector<SuiteSummary>& summaries,
                          const std::string& config_echo_name);

void emit_report(const std::vector<SuiteSummary>& summaries,
                 const std::filesystem::path& path,
                 const std::string& config_echo_name);

}  // namespace sintheta
