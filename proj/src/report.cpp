#include "sintheta/report.hpp"

#include <cstdio>
#include <fstream>

namespace sintheta {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string render_report(const std::vector<SuiteSummary>& summaries,
                          const std::string& config_echo_name) {
  std::string out;
  for (const SuiteSummary& s : summaries) {
    out += "suite " + s.suite + ": " + (s.hard_pass() ? "PASS" : "FAIL") + "\n";
    out += "  trials: total=" + std::to_string(s.total) +
           " passed=" + std::to_string(s.passed) +
           " failed=" + std::to_string(s.failed) +
           " skipped=" + std::to_string(s.skipped);
    if (s.skipped > 0) out += " (gap)";
    out += "\n";
    for (const auto& [name, value] : s.max_residuals) {
      const double allowance = s.residual_allowances.at(name);
      out += "  residual " + name + ": max " + fmt(value) + " (allowed " +
             fmt(allowance) + ")\n";
    }
    for (const auto& [name, stat] : s.dominance) {
      if (stat.met == 0) {
        out += "  bound " + name + ": no trials with assumptions met\n";
        continue;
      }
      const double rate = 100.0 * stat.dominated / stat.met;
      out += "  bound " + name + ": dominated " +
             std::to_string(stat.dominated) + "/" + std::to_string(stat.met) +
             " (" + fmt(rate, "%.2f") + "%)\n";
    }
    if (s.scaling) {
      const ScalingResult& sc = *s.scaling;
      out += "  scaling: slope=" + fmt(sc.slope) + " CI=[" + fmt(sc.ci_low) +
             ", " + fmt(sc.ci_high) + "] branch=" +
             (sc.rank_r_branch ? "rank_r" : "full_rank") + "\n";
      for (const ScalingPoint& p : sc.points) {
        out += "    n=" + std::to_string(p.n) + " median_l2inf=" +
               fmt(p.median_measured) + " median_bound=" +
               fmt(p.median_bound) + "\n";
      }
    }
    if (s.tightness) {
      const TightnessResult& t = *s.tightness;
      out += "  tightness: median sinV/sinU=" +
             fmt(t.median_ratio_v_over_u) + " one-sided<uniform in " +
             fmt(100.0 * t.frac_onesided_below_uniform, "%.2f") +
             "% of trials, median uniform/one-sided=" +
             fmt(t.median_uniform_over_onesided) + " (" +
             std::to_string(t.trials) + " trials)\n";
    }
    if (s.calibration) {
      const CalibrationResult& c = *s.calibration;
      if (c.feasible) {
        out += "  calibrated constants: c1=" + fmt(c.c1) + " c2=" + fmt(c.c2) +
               " rate=" + fmt(100.0 * c.rate, "%.2f") + "% (target " +
               fmt(100.0 * c.target, "%.2f") + "%, " +
               std::to_string(c.trials) + " trials)\n";
      } else {
        out += "  calibration: no feasible constants on the grid (target " +
               fmt(100.0 * c.target, "%.2f") + "%)\n";
      }
    }
    for (const std::string& f : s.failures) out += "  failure: " + f + "\n";
  }
  out += "reproduce: config echo " + config_echo_name + "\n";
  return out;
}

void emit_report(const std::vector<SuiteSummary>& summaries,
                 const std::filesystem::path& path,
                 const std::string& config_echo_name) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << render_report(summaries, config_echo_name);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sintheta
