#include "sintheta/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

namespace sintheta {

using nlohmann::json;

namespace {

const std::set<std::string> kSubcommands = {
    "verify", "bounds", "tightness", "scaling", "calibrate", "svt", "pca"};

[[noreturn]] void bad_field(const std::string& where, const char* expected) {
  throw ConfigError(where + ": expected " + expected);
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) bad_field(where, "a number");
  return j.get<double>();
}

std::int64_t as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad_field(where, "an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) bad_field(where, "a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) bad_field(where, "a boolean");
  return j.get<bool>();
}

GridRow parse_grid_row(const json& j, const std::string& where) {
  if (!j.is_object()) bad_field(where, "an object");
  GridRow row;
  for (const auto& [key, value] : j.items()) {
    const std::string at = where + "." + key;
    if (key == "n") row.spectrum.n = as_int(value, at);
    else if (key == "m") row.spectrum.m = as_int(value, at);
    else if (key == "r") row.spectrum.r = as_int(value, at);
    else if (key == "top_values") {
      if (!value.is_array()) bad_field(at, "an array of numbers");
      row.spectrum.top_values.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        row.spectrum.top_values.push_back(
            as_double(value[i], at + "[" + std::to_string(i) + "]"));
      }
    } else if (key == "tail_mode") {
      try {
        row.spectrum.tail_mode = tail_mode_from_string(as_string(value, at));
      } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
      }
    } else if (key == "tail_param") row.spectrum.tail_param = as_double(value, at);
    else if (key == "gap_target") row.spectrum.gap_target = as_double(value, at);
    else if (key == "incoherence") {
      try {
        row.mode = incoherence_mode_from_string(as_string(value, at));
      } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
      }
    } else if (key == "mu") row.mu = as_double(value, at);
    else if (key == "noise_kind") {
      const std::string s = as_string(value, at);
      if (s == "entry_sigma") row.noise_kind = NoiseLevelKind::entry_sigma;
      else if (s == "gap_fraction") row.noise_kind = NoiseLevelKind::gap_fraction;
      else bad_field(at, "one of entry_sigma|gap_fraction");
    } else if (key == "noise_level") row.noise_level = as_double(value, at);
    else if (key == "trials") row.trials = static_cast<int>(as_int(value, at));
    else throw ConfigError(at + ": unknown field");
  }
  if (row.spectrum.top_values.empty() && row.spectrum.r > 0) {
    row.spectrum.top_values =
        linspace_top_values(row.spectrum.r, 2.0, 3.0);
  }
  validate_spectrum(row.spectrum);
  return row;
}

void parse_tolerances(const json& j, Tolerances& tol, const std::string& where) {
  if (!j.is_object()) bad_field(where, "an object");
  for (const auto& [key, value] : j.items()) {
    const std::string at = where + "." + key;
    if (key == "tol_orth") tol.tol_orth = as_double(value, at);
    else if (key == "tol_recon") tol.tol_recon = as_double(value, at);
    else if (key == "delta_gap_rel") tol.delta_gap_rel = as_double(value, at);
    else if (key == "identity_base") tol.identity_base = as_double(value, at);
    else if (key == "series_tol") tol.series_tol = as_double(value, at);
    else if (key == "series_kmax")
      tol.series_kmax = static_cast<int>(as_int(value, at));
    else if (key == "equivalents_tol") tol.equivalents_tol = as_double(value, at);
    else throw ConfigError(at + ": unknown field");
  }
}

void parse_tightness(const json& j, TightnessConfig& t, const std::string& where) {
  if (!j.is_object()) bad_field(where, "an object");
  for (const auto& [key, value] : j.items()) {
    const std::string at = where + "." + key;
    if (key == "n") t.n = as_int(value, at);
    else if (key == "m") t.m = as_int(value, at);
    else if (key == "r") t.r = as_int(value, at);
    else if (key == "sigma_factor") t.sigma_factor = as_double(value, at);
    else if (key == "trials") t.trials = static_cast<int>(as_int(value, at));
    else throw ConfigError(at + ": unknown field");
  }
}

void parse_scaling(const json& j, ScalingConfig& s, const std::string& where) {
  if (!j.is_object()) bad_field(where, "an object");
  for (const auto& [key, value] : j.items()) {
    const std::string at = where + "." + key;
    if (key == "r") s.r = as_int(value, at);
    else if (key == "mu") s.mu = as_double(value, at);
    else if (key == "incoherence") {
      try {
        s.mode = incoherence_mode_from_string(as_string(value, at));
      } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
      }
    } else if (key == "n_grid") {
      if (!value.is_array()) bad_field(at, "an array of integers");
      s.n_grid.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        s.n_grid.push_back(
            as_int(value[i], at + "[" + std::to_string(i) + "]"));
      }
    } else if (key == "trials") s.trials = static_cast<int>(as_int(value, at));
    else if (key == "sigma_factor") s.sigma_factor = as_double(value, at);
    else if (key == "tail_mode") {
      try {
        s.tail_mode = tail_mode_from_string(as_string(value, at));
      } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
      }
    } else if (key == "tail_ratio") s.tail_ratio = as_double(value, at);
    else if (key == "c1") s.c1 = as_double(value, at);
    else if (key == "c2") s.c2 = as_double(value, at);
    else throw ConfigError(at + ": unknown field");
  }
}

void parse_calibrate(const json& j, CalibrateConfig& c, const std::string& where) {
  if (!j.is_object()) bad_field(where, "an object");
  for (const auto& [key, value] : j.items()) {
    const std::string at = where + "." + key;
    if (key == "bound") c.bound_id = as_string(value, at);
    else if (key == "target_rate") c.target_rate = as_double(value, at);
    else if (key == "c_grid") {
      if (!value.is_array()) bad_field(at, "an array of numbers");
      c.c_grid.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        c.c_grid.push_back(
            as_double(value[i], at + "[" + std::to_string(i) + "]"));
      }
    } else if (key == "grid") {
      if (!value.is_array()) bad_field(at, "an array of grid rows");
      c.grid.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        c.grid.push_back(
            parse_grid_row(value[i], at + "[" + std::to_string(i) + "]"));
      }
    } else throw ConfigError(at + ": unknown field");
  }
}

void parse_inputs(const json& j, FileInputs& in, const std::string& where) {
  if (!j.is_object()) bad_field(where, "an object");
  for (const auto& [key, value] : j.items()) {
    const std::string at = where + "." + key;
    if (key == "a") in.a = as_string(value, at);
    else if (key == "da") in.da = as_string(value, at);
    else if (key == "atilde") in.atilde = as_string(value, at);
    else if (key == "e") in.e = as_string(value, at);
    else if (key == "rank") in.rank = as_int(value, at);
    else if (key == "sigma") in.sigma = as_double(value, at);
    else throw ConfigError(at + ": unknown field");
  }
}

json grid_row_to_json(const GridRow& row) {
  json j;
  j["n"] = row.spectrum.n;
  j["m"] = row.spectrum.m;
  j["r"] = row.spectrum.r;
  j["top_values"] = row.spectrum.top_values;
  j["tail_mode"] = to_string(row.spectrum.tail_mode);
  j["tail_param"] = row.spectrum.tail_param;
  j["gap_target"] = row.spectrum.gap_target;
  j["incoherence"] = to_string(row.mode);
  j["mu"] = row.mu;
  j["noise_kind"] = row.noise_kind == NoiseLevelKind::entry_sigma
                        ? "entry_sigma"
                        : "gap_fraction";
  j["noise_level"] = row.noise_level;
  j["trials"] = row.trials;
  return j;
}

}  // namespace

void merge_config_file(CliConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "subcommand") {
      as_string(value, key);  // present in config echoes; the CLI decides it
    }
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int(value, key));
    else if (key == "out") cfg.out_dir = as_string(value, key);
    else if (key == "workers") cfg.workers = static_cast<int>(as_int(value, key));
    else if (key == "trials") cfg.trials_override = static_cast<int>(as_int(value, key));
    else if (key == "timing") cfg.timing = as_bool(value, key);
    else if (key == "tolerances") parse_tolerances(value, cfg.tol, key);
    else if (key == "grid") {
      if (!value.is_array()) bad_field(key, "an array of grid rows");
      cfg.grid.clear();
      for (std::size_t i = 0; i < value.size(); ++i) {
        cfg.grid.push_back(
            parse_grid_row(value[i], "grid[" + std::to_string(i) + "]"));
      }
    } else if (key == "tightness") parse_tightness(value, cfg.tightness, key);
    else if (key == "scaling") parse_scaling(value, cfg.scaling, key);
    else if (key == "calibrate") parse_calibrate(value, cfg.calibrate, key);
    else if (key == "inputs") parse_inputs(value, cfg.inputs, key);
    else throw ConfigError(key + ": unknown field");
  }
}

CliConfig parse_config(int argc, const char* const* argv) {
  CLI::App app{"sin-theta perturbation toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path, out_dir, a_path, da_path, atilde_path, e_path;
  std::uint64_t seed = 0;
  int trials = 0, workers = 0;
  double tol = 0.0, sigma = 0.0;
  std::int64_t rank = 0;
  bool timing = false;

  app.add_option("--config", config_path, "JSON config file");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* trials_opt =
      app.add_option("--trials", trials, "override per-row trial counts");
  auto* tol_opt =
      app.add_option("--tol", tol, "override the identity tolerance base");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads");
  auto* timing_flag =
      app.add_flag("--timing", timing, "record real wall times in CSV output");
  auto* a_opt = app.add_option("--a", a_path, "matrix A file (.csv or binary)");
  auto* da_opt = app.add_option("--da", da_path, "perturbation file");
  auto* atilde_opt = app.add_option("--atilde", atilde_path,
                                    "perturbed matrix file");
  auto* e_opt = app.add_option("--e", e_path, "noise file (svt/pca)");
  auto* rank_opt = app.add_option("--rank", rank, "split rank for file inputs");
  auto* sigma_opt =
      app.add_option("--sigma", sigma, "generated noise sigma for file inputs");

  for (const std::string& name : kSubcommands) {
    app.add_subcommand(name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::printf("%s", app.help().c_str());
    std::exit(0);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("usage: ") + e.what());
  }

  CliConfig cfg;
  for (const std::string& name : kSubcommands) {
    if (app.get_subcommand(name)->parsed()) cfg.subcommand = name;
  }

  if (!config_path.empty()) {
    cfg.config_path = config_path;
    merge_config_file(cfg, config_path);
  }

  // Flags beat file values.
  if (seed_opt->count() > 0) cfg.seed = seed;
  if (out_opt->count() > 0) cfg.out_dir = out_dir;
  if (trials_opt->count() > 0) cfg.trials_override = trials;
  if (tol_opt->count() > 0) cfg.tol_override = tol;
  if (workers_opt->count() > 0) cfg.workers = workers;
  if (timing_flag->count() > 0) cfg.timing = timing;
  if (a_opt->count() > 0) cfg.inputs.a = a_path;
  if (da_opt->count() > 0) cfg.inputs.da = da_path;
  if (atilde_opt->count() > 0) cfg.inputs.atilde = atilde_path;
  if (e_opt->count() > 0) cfg.inputs.e = e_path;
  if (rank_opt->count() > 0) cfg.inputs.rank = rank;
  if (sigma_opt->count() > 0) cfg.inputs.sigma = sigma;

  // Environment default for the output directory has the lowest precedence.
  if (cfg.out_dir.empty()) {
    const char* env = std::getenv("SINTHETA_OUT");
    cfg.out_dir = env != nullptr && env[0] != '\0' ? env : "sintheta_out";
  }

  if (cfg.workers < 1) cfg.workers = 1;
  if (cfg.trials_override > 0) {
    for (GridRow& row : cfg.grid) row.trials = cfg.trials_override;
    cfg.tightness.trials = cfg.trials_override;
    cfg.scaling.trials = cfg.trials_override;
    for (GridRow& row : cfg.calibrate.grid) row.trials = cfg.trials_override;
  }
  if (cfg.tol_override > 0.0) cfg.tol.identity_base = cfg.tol_override;
  return cfg;
}

std::string config_echo_json(const CliConfig& cfg) {
  json j;
  j["subcommand"] = cfg.subcommand;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_dir;
  j["workers"] = cfg.workers;
  j["timing"] = cfg.timing;
  j["tolerances"] = {
      {"tol_orth", cfg.tol.tol_orth},
      {"tol_recon", cfg.tol.tol_recon},
      {"delta_gap_rel", cfg.tol.delta_gap_rel},
      {"identity_base", cfg.tol.identity_base},
      {"series_tol", cfg.tol.series_tol},
      {"series_kmax", cfg.tol.series_kmax},
      {"equivalents_tol", cfg.tol.equivalents_tol},
  };
  j["grid"] = json::array();
  for (const GridRow& row : cfg.grid) j["grid"].push_back(grid_row_to_json(row));
  j["tightness"] = {{"n", cfg.tightness.n},
                    {"m", cfg.tightness.m},
                    {"r", cfg.tightness.r},
                    {"sigma_factor", cfg.tightness.sigma_factor},
                    {"trials", cfg.tightness.trials}};
  j["scaling"] = {{"r", cfg.scaling.r},
                  {"mu", cfg.scaling.mu},
                  {"incoherence", to_string(cfg.scaling.mode)},
                  {"n_grid", cfg.scaling.n_grid},
                  {"trials", cfg.scaling.trials},
                  {"sigma_factor", cfg.scaling.sigma_factor},
                  {"tail_mode", to_string(cfg.scaling.tail_mode)},
                  {"tail_ratio", cfg.scaling.tail_ratio},
                  {"c1", cfg.scaling.c1},
                  {"c2", cfg.scaling.c2}};
  json cal;
  cal["bound"] = cfg.calibrate.bound_id;
  cal["target_rate"] = cfg.calibrate.target_rate;
  cal["c_grid"] = cfg.calibrate.c_grid;
  cal["grid"] = json::array();
  for (const GridRow& row : cfg.calibrate.grid)
    cal["grid"].push_back(grid_row_to_json(row));
  j["calibrate"] = cal;
  if (cfg.inputs.any()) {
    j["inputs"] = {{"a", cfg.inputs.a},       {"da", cfg.inputs.da},
                   {"atilde", cfg.inputs.atilde}, {"e", cfg.inputs.e},
                   {"rank", cfg.inputs.rank}, {"sigma", cfg.inputs.sigma}};
  }
  return j.dump(2) + "\n";
}

void write_config_echo(const CliConfig& cfg) {
  const std::filesystem::path path =
      std::filesystem::path(cfg.out_dir) / "config_echo.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << config_echo_json(cfg);
}

}  // namespace sintheta
