#include "sintheta/csv.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

namespace sintheta {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void append_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_row(std::string& out, std::uint64_t seed, Index n, Index m,
                Index r, double sigma, const std::string& name, double bound,
                double measured, bool dominated, bool assumptions,
                double residual, double wall_ms) {
  out += std::to_string(seed);
  out += ',';
  out += std::to_string(n);
  out += ',';
  out += std::to_string(m);
  out += ',';
  out += std::to_string(r);
  out += ',';
  append_double(out, sigma);
  out += ',';
  out += name;
  out += ',';
  append_double(out, bound);
  out += ',';
  append_double(out, measured);
  out += ',';
  out += dominated ? '1' : '0';
  out += ',';
  out += assumptions ? '1' : '0';
  out += ',';
  append_double(out, residual);
  out += ',';
  append_double(out, wall_ms);
  out += '\n';
}

}  // namespace

std::string suite_csv_string(const std::vector<TrialRecord>& records,
                             const CsvOptions& opts) {
  std::string out =
      "seed,n,m,r,sigma,bound_name,bound,measured,dominated,assumptions_met,"
      "residual,wall_ms\n";
  for (const TrialRecord& rec : records) {
    const double wall = opts.include_timing ? rec.wall_ms : 0.0;
    if (rec.status == TrialStatus::skipped) {
      append_row(out, rec.seed, rec.n, rec.m, rec.r, rec.sigma,
                 "skipped_" + (rec.note.empty() ? "unknown" : rec.note), kNan,
                 kNan, false, false, kNan, wall);
      continue;
    }
    for (const BoundReport& rep : rec.reports) {
      append_row(out, rec.seed, rec.n, rec.m, rec.r, rec.sigma, rep.name,
                 rep.bound, rep.measured, rep.dominated, rep.assumptions_met,
                 kNan, wall);
    }
    for (const IdentityResidual& res : rec.residuals) {
      append_row(out, rec.seed, rec.n, rec.m, rec.r, rec.sigma, res.name,
                 res.tol, res.value, res.pass, true, res.value, wall);
    }
    if (rec.reports.empty() && rec.residuals.empty()) {
      append_row(out, rec.seed, rec.n, rec.m, rec.r, rec.sigma,
                 rec.status == TrialStatus::failed ? "failed" : "empty", kNan,
                 kNan, false, false, kNan, wall);
    }
  }
  return out;
}

void emit_csv(const std::vector<TrialRecord>& records,
              const std::filesystem::path& path, const CsvOptions& opts) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << suite_csv_string(records, opts);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sintheta
