#include <CLI11.hpp>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <sstream>

#include "odmr/config.hpp"
#include "odmr/csvio.hpp"
#include "odmr/experiments.hpp"
#include "odmr/params.hpp"
#include "odmr/sensitivity.hpp"

namespace {

constexpr const char* tool_version = "0.1.0";

// errors in how the tool was invoked (bad flags, bad config, bad
// sequence) exit with 2; failures during the computation with 3
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool looks_like_json(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{';
  }
  return false;
}

odmr::SimParams builtin_profile(const std::string& name, std::vector<std::string>* warnings) {
  odmr::SimParams p;
  if (name == "crystal") {
    p.decoherence.sigma_inh_mhz = odmr::sigma_mhz_from_t2star(0.39);
  } else if (name == "film") {
    p.decoherence.t2_us = {0.75, 0.75, 0.75};
    p.decoherence.sigma_inh_mhz = odmr::sigma_mhz_from_t2star(0.12);
  } else {
    throw UsageError("unknown profile '" + name + "' (built-in profiles: crystal, film)");
  }
  auto notes = p.validate();
  if (warnings) warnings->insert(warnings->end(), notes.begin(), notes.end());
  return p;
}

// --config accepts an INI profile or a JSON sidecar from a previous run
struct LoadedConfig {
  odmr::SimParams params;
  std::vector<std::string> warnings;
  std::optional<ordered_json> sidecar;
};

LoadedConfig load_config(const std::string& path) {
  LoadedConfig out;
  std::string text = read_file(path);
  if (looks_like_json(text)) {
    ordered_json j;
    try {
      j = ordered_json::parse(text);
    } catch (const std::exception& e) {
      throw UsageError(path + ": not valid JSON: " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object())
      throw UsageError(path + ": JSON sidecar lacks a \"config\" object");
    std::map<std::string, std::vector<double>> kv;
    for (auto& [key, value] : j["config"].items()) {
      try {
        if (value.is_array())
          kv[key] = value.get<std::vector<double>>();
        else
          kv[key] = {value.get<double>()};
      } catch (const std::exception&) {
        throw UsageError(path + ": config key '" + key + "' is not numeric");
      }
    }
    try {
      out.params = odmr::config::from_key_values(kv, &out.warnings);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    out.sidecar = std::move(j);
    return out;
  }
  try {
    auto loaded = odmr::config::load_file(path);
    out.params = loaded.params;
    out.warnings = loaded.warnings;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return out;
}

std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

ordered_json config_json(const odmr::SimParams& p) {
  ordered_json j = ordered_json::object();
  for (const auto& [key, values] : odmr::config::to_key_values(p)) {
    if (values.size() == 1)
      j[key] = values[0];
    else
      j[key] = values;
  }
  return j;
}

ordered_json fit_json(const odmr::experiments::FitSummary& f) {
  ordered_json j;
  j["model"] = f.model;
  for (const auto& [k, v] : f.values) j[k] = v;
  j["rms_residual"] = f.rms_residual;
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  return j;
}

void write_outputs(const std::string& out_csv, const odmr::experiments::Trace& trace,
                   ordered_json sidecar) {
  odmr::csvio::write_csv(out_csv, trace);
  sidecar["csv"] = std::filesystem::path(out_csv).filename().string();
  std::ofstream js(sidecar_path(out_csv), std::ios::binary);
  if (!js) throw std::runtime_error("cannot open '" + sidecar_path(out_csv) + "' for writing");
  js << sidecar.dump(2) << "\n";
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---- experiment ----------------------------------------------------------

struct ExperimentCli {
  std::string preset, config, profile = "crystal", out, pair = "xz";
  std::uint64_t seed = 1;
  int jobs = 1;
  double rabi = 5.0, detuning = 5.0, noise = 0.0;
  odmr::experiments::AxisSpec x, x2;
};

int cmd_experiment(const ExperimentCli& cli, const CLI::App& sub) {
  std::vector<std::string> warnings;
  odmr::SimParams params;
  std::optional<ordered_json> sidecar_in;
  if (!cli.config.empty()) {
    LoadedConfig lc = load_config(cli.config);
    params = lc.params;
    warnings = lc.warnings;
    sidecar_in = lc.sidecar;
  } else {
    params = builtin_profile(cli.profile, &warnings);
  }

  odmr::experiments::ExperimentSpec spec;
  spec.preset = cli.preset;
  try {
    spec.pair = odmr::spin::pair_from_name(cli.pair);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  spec.rabi_mhz = cli.rabi;
  spec.ramsey_detuning_mhz = cli.detuning;
  spec.x = cli.x;
  spec.x2 = cli.x2;
  spec.noise = cli.noise;
  spec.seed = cli.seed;
  spec.jobs = cli.jobs;

  // a sidecar config reproduces its run unless flags say otherwise
  if (sidecar_in && sidecar_in->contains("experiment")) {
    const ordered_json& e = (*sidecar_in)["experiment"];
    auto unset = [&sub](const std::string& flag) { return sub.count(flag) == 0; };
    if (unset("--preset") && e.contains("preset")) spec.preset = e["preset"].get<std::string>();
    if (unset("--pair") && e.contains("pair"))
      spec.pair = odmr::spin::pair_from_name(e["pair"].get<std::string>());
    if (unset("--rabi") && e.contains("rabi_mhz")) spec.rabi_mhz = e["rabi_mhz"].get<double>();
    if (unset("--detuning") && e.contains("detuning_mhz"))
      spec.ramsey_detuning_mhz = e["detuning_mhz"].get<double>();
    if (unset("--noise") && e.contains("noise")) spec.noise = e["noise"].get<double>();
    if (unset("--seed") && e.contains("seed")) spec.seed = e["seed"].get<std::uint64_t>();
    auto axis = [&](const char* key, odmr::experiments::AxisSpec& a, const char* fmin,
                    const char* fmax, const char* fpts) {
      if (!e.contains(key)) return;
      const ordered_json& ax = e[key];
      if (unset(fmin) && ax.contains("min")) a.min = ax["min"].get<double>();
      if (unset(fmax) && ax.contains("max")) a.max = ax["max"].get<double>();
      if (unset(fpts) && ax.contains("points")) a.points = ax["points"].get<int>();
    };
    axis("x", spec.x, "--x-min", "--x-max", "--points");
    axis("x2", spec.x2, "--x2-min", "--x2-max", "--x2-points");
  }
  if (spec.preset.empty())
    throw UsageError("experiment: --preset is required (or a sidecar config that names one)");

  odmr::experiments::PresetResult result = odmr::experiments::run_preset(params, spec);
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  print_warnings(warnings);

  ordered_json sidecar;
  sidecar["tool"] = "odmrsim";
  sidecar["version"] = tool_version;
  sidecar["command"] = "experiment";
  ordered_json ex;
  ex["preset"] = spec.preset;
  ex["pair"] = odmr::spin::pair_name(spec.pair);
  ex["rabi_mhz"] = spec.rabi_mhz;
  ex["detuning_mhz"] = spec.ramsey_detuning_mhz;
  ex["noise"] = spec.noise;
  ex["seed"] = spec.seed;
  auto axis_json = [](const odmr::experiments::AxisSpec& a) {
    ordered_json j = ordered_json::object();
    if (!std::isnan(a.min)) j["min"] = a.min;
    if (!std::isnan(a.max)) j["max"] = a.max;
    if (a.points > 0) j["points"] = a.points;
    return j;
  };
  if (spec.x.given()) ex["x"] = axis_json(spec.x);
  if (spec.x2.given()) ex["x2"] = axis_json(spec.x2);
  sidecar["experiment"] = ex;
  sidecar["config"] = config_json(params);
  if (result.fit) sidecar["fit"] = fit_json(*result.fit);
  sidecar["warnings"] = warnings;

  if (!cli.out.empty()) {
    write_outputs(cli.out, result.trace, sidecar);
    std::cout << "wrote " << cli.out << " (" << result.trace.y.size() << " points) and "
              << sidecar_path(cli.out) << "\n";
  } else {
    std::cout << odmr::csvio::to_csv(result.trace);
  }

  if (result.fit) {
    std::cout << "fit: " << result.fit->model;
    for (const auto& [k, v] : result.fit->values) std::cout << " " << k << "=" << v;
    std::cout << (result.fit->converged ? "" : "  [NOT CONVERGED]") << "\n";
    if (!result.fit->converged) {
      std::cerr << "error: fit did not converge\n";
      return 3;
    }
  }
  return 0;
}

// ---- run ------------------------------------------------------------------

struct RunCli {
  std::string file, config, profile = "crystal", out;
  std::uint64_t seed = 1;
  int jobs = 1;
  double noise = 0.0;
};

int cmd_run(const RunCli& cli) {
  std::vector<std::string> warnings;
  odmr::SimParams params;
  if (!cli.config.empty()) {
    LoadedConfig lc = load_config(cli.config);
    params = lc.params;
    warnings = lc.warnings;
  } else {
    params = builtin_profile(cli.profile, &warnings);
  }

  std::string text = read_file(cli.file);
  odmr::seq::ParseResult parsed = odmr::seq::parse(text);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics)
      std::cerr << cli.file << ":" << d.pos.line << ":" << d.pos.col << ": error: " << d.message
                << "\n";
    throw UsageError("sequence file has " + std::to_string(parsed.diagnostics.size()) +
                     " error(s)");
  }

  odmr::experiments::Trace trace =
      odmr::experiments::run_sequence_scan(*parsed.ast, params, cli.jobs, &warnings);
  trace.preset = "sequence";
  trace.seed = cli.seed;
  odmr::experiments::add_noise(trace, cli.noise, cli.seed);
  print_warnings(warnings);

  ordered_json sidecar;
  sidecar["tool"] = "odmrsim";
  sidecar["version"] = tool_version;
  sidecar["command"] = "run";
  sidecar["sequence_file"] = cli.file;
  sidecar["sequence"] = odmr::seq::print(*parsed.ast);
  sidecar["noise"] = cli.noise;
  sidecar["seed"] = cli.seed;
  sidecar["config"] = config_json(params);
  sidecar["warnings"] = warnings;

  if (!cli.out.empty()) {
    write_outputs(cli.out, trace, sidecar);
    std::cout << "wrote " << cli.out << " (" << trace.y.size() << " points) and "
              << sidecar_path(cli.out) << "\n";
  } else {
    std::cout << odmr::csvio::to_csv(trace);
  }
  return 0;
}

// ---- sensitivity -----------------------------------------------------------

struct SensitivityCli {
  std::string profile = "film", mode = "both", sweep, out;
  double contrast = -1, doping = -1, n_avg = -1, t_overhead = -1, coherence = -1;
  double start = 0, stop = 0;
  int steps = 0;
  bool log_spaced = false;
  bool profile_given = false;  // bare table lists every profile
};

int cmd_sensitivity(const SensitivityCli& cli) {
  const odmr::sensing::SensingProfile* prof = nullptr;
  try {
    prof = &odmr::sensing::profile_by_name(cli.profile);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }

  std::vector<odmr::sensing::Mode> modes;
  if (cli.mode == "dc")
    modes = {odmr::sensing::Mode::dc};
  else if (cli.mode == "ac")
    modes = {odmr::sensing::Mode::ac};
  else if (cli.mode == "both")
    modes = {odmr::sensing::Mode::dc, odmr::sensing::Mode::ac};
  else
    throw UsageError("unknown mode '" + cli.mode + "' (expected dc, ac or both)");

  auto apply_overrides = [&](odmr::sensing::SensingParams p) {
    if (cli.contrast > 0) p.contrast = cli.contrast;
    if (cli.doping > 0) p.doping = cli.doping;
    if (cli.n_avg > 0) p.n_avg = cli.n_avg;
    if (cli.t_overhead >= 0) p.t_overhead_us = cli.t_overhead;
    if (cli.coherence > 0) p.coherence_us = cli.coherence;
    return p;
  };

  if (!cli.sweep.empty()) {
    if (cli.steps < 1 || cli.stop == cli.start)
      throw UsageError("sensitivity sweep needs --start, --stop and --steps");
    odmr::sensing::SweepAxis axis;
    try {
      axis = odmr::sensing::axis_from_name(cli.sweep);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    odmr::experiments::Trace trace;
    trace.preset = "sensitivity";
    trace.x_name = cli.sweep;
    for (auto mode : modes) {
      auto points = odmr::sensing::sweep_eta(apply_overrides(prof->with_mode(mode)), axis,
                                             cli.start, cli.stop, cli.steps, cli.log_spaced);
      if (modes.size() == 1) {
        for (const auto& pt : points) {
          trace.x.push_back(pt.value);
          trace.y.push_back(pt.eta_v_nt_um32);
        }
        trace.y_name = "eta_v_nt_um32";
      } else {
        // both modes: dc rows first, then ac, tagged by alpha in x2
        trace.x2_name = "alpha";
        for (const auto& pt : points) {
          trace.x.push_back(pt.value);
          trace.x2.push_back(mode == odmr::sensing::Mode::dc ? 1.0 : std::numbers::pi / 2);
          trace.y.push_back(pt.eta_v_nt_um32);
        }
        trace.y_name = "eta_v_nt_um32";
      }
    }
    if (!cli.out.empty()) {
      ordered_json sidecar;
      sidecar["tool"] = "odmrsim";
      sidecar["version"] = tool_version;
      sidecar["command"] = "sensitivity";
      sidecar["profile"] = prof->name;
      sidecar["mode"] = cli.mode;
      sidecar["sweep"] = cli.sweep;
      write_outputs(cli.out, trace, sidecar);
      std::cout << "wrote " << cli.out << " (" << trace.y.size() << " points)\n";
    } else {
      std::cout << odmr::csvio::to_csv(trace);
    }
    return 0;
  }

  std::vector<const odmr::sensing::SensingProfile*> rows;
  if (cli.profile_given) {
    rows.push_back(prof);
  } else {
    for (const auto& bp : odmr::sensing::builtin_profiles()) rows.push_back(&bp);
  }
  std::cout << "profile    mode  C       c_S       n_avg    t_ovh_us  T_us    rho_um3      "
               "eta_nT_um32\n";
  for (const auto* row : rows) {
    for (auto mode : modes) {
      odmr::sensing::SensingParams p = apply_overrides(row->with_mode(mode));
      odmr::sensing::SensitivityResult r = odmr::sensing::eta_v(p);
      char line[256];
      std::snprintf(line, sizeof line, "%-10s %-5s %-7g %-9g %-8g %-9g %-7g %-12g %.6g\n",
                    row->name.c_str(), mode == odmr::sensing::Mode::dc ? "dc" : "ac", p.contrast,
                    p.doping, p.n_avg, p.t_overhead_us, p.coherence_us, r.rho_s_per_um3,
                    r.eta_v_nt_um32);
      std::cout << line;
    }
  }
  return 0;
}

// ---- validate ---------------------------------------------------------------

int cmd_validate(const std::string& file) {
  std::string text = read_file(file);
  odmr::seq::ParseResult parsed = odmr::seq::parse(text);
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics)
      std::cerr << file << ":" << d.pos.line << ":" << d.pos.col << ": error: " << d.message
                << "\n";
    return 2;
  }
  std::cout << odmr::seq::print(*parsed.ast);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator for optically detected coherent control of molecular triplet spins"};
  app.require_subcommand(1);

  ExperimentCli ex;
  CLI::App* sub_ex = app.add_subcommand("experiment", "run a named experiment preset");
  sub_ex->add_option("--preset", ex.preset, "preset name (see README)");
  sub_ex->add_option("--config", ex.config, "INI profile or JSON sidecar of a previous run");
  sub_ex->add_option("--profile", ex.profile, "built-in profile: crystal or film")
      ->default_val("crystal");
  sub_ex->add_option("--out", ex.out, "output CSV path (JSON sidecar written alongside)");
  sub_ex->add_option("--seed", ex.seed, "random seed")->default_val(1);
  sub_ex->add_option("--jobs", ex.jobs, "worker threads")->default_val(1);
  sub_ex->add_option("--pair", ex.pair, "addressed sublevel pair: xy, yz or xz")
      ->default_val("xz");
  sub_ex->add_option("--rabi", ex.rabi, "Rabi frequency, MHz")->default_val(5.0);
  sub_ex->add_option("--detuning", ex.detuning, "Ramsey detuning, MHz")->default_val(5.0);
  sub_ex->add_option("--noise", ex.noise, "relative noise amplitude")->default_val(0.0);
  sub_ex->add_option("--x-min", ex.x.min, "first axis start");
  sub_ex->add_option("--x-max", ex.x.max, "first axis stop");
  sub_ex->add_option("--points", ex.x.points, "first axis point count");
  sub_ex->add_option("--x2-min", ex.x2.min, "second axis start");
  sub_ex->add_option("--x2-max", ex.x2.max, "second axis stop");
  sub_ex->add_option("--x2-points", ex.x2.points, "second axis point count");

  RunCli rn;
  CLI::App* sub_run = app.add_subcommand("run", "execute a pulse-sequence (.pseq) file");
  sub_run->add_option("file", rn.file, "sequence file")->required();
  sub_run->add_option("--config", rn.config, "INI profile or JSON sidecar");
  sub_run->add_option("--profile", rn.profile, "built-in profile: crystal or film")
      ->default_val("crystal");
  sub_run->add_option("--out", rn.out, "output CSV path");
  sub_run->add_option("--seed", rn.seed, "random seed")->default_val(1);
  sub_run->add_option("--jobs", rn.jobs, "worker threads")->default_val(1);
  sub_run->add_option("--noise", rn.noise, "relative noise amplitude")->default_val(0.0);

  SensitivityCli sc;
  CLI::App* sub_sens = app.add_subcommand("sensitivity", "volume-normalised sensitivity");
  sub_sens->add_option("--profile", sc.profile, "film, crystal or projected")
      ->default_val("film");
  sub_sens->add_option("--mode", sc.mode, "dc, ac or both")->default_val("both");
  sub_sens->add_option("--contrast", sc.contrast, "optical spin contrast C");
  sub_sens->add_option("--doping", sc.doping, "doping concentration, mol/mol");
  sub_sens->add_option("--n-avg", sc.n_avg, "photons per spin per readout");
  sub_sens->add_option("--t-overhead", sc.t_overhead, "overhead time, us");
  sub_sens->add_option("--coherence", sc.coherence, "coherence time, us");
  sub_sens->add_option("--sweep", sc.sweep,
                       "sweep axis: contrast, doping, n_avg, t_overhead or coherence");
  sub_sens->add_option("--start", sc.start, "sweep start");
  sub_sens->add_option("--stop", sc.stop, "sweep stop");
  sub_sens->add_option("--steps", sc.steps, "sweep steps");
  sub_sens->add_flag("--log", sc.log_spaced, "log-spaced sweep");
  sub_sens->add_option("--out", sc.out, "output CSV path");

  std::string validate_file;
  CLI::App* sub_val = app.add_subcommand("validate", "check a sequence file and print it");
  sub_val->add_option("file", validate_file, "sequence file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sub_ex->parsed()) return cmd_experiment(ex, *sub_ex);
    if (sub_run->parsed()) return cmd_run(rn);
    if (sub_sens->parsed()) {
      sc.profile_given = sub_sens->count("--profile") > 0;
      return cmd_sensitivity(sc);
    }
    if (sub_val->parsed()) return cmd_validate(validate_file);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
