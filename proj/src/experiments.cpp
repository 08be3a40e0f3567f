#include "odmr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "odmr/quadrature.hpp"

namespace odmr::experiments {

namespace {

constexpr double deg2rad = std::numbers::pi / 180.0;
constexpr double init_laser_us = 10.0;
constexpr double shelf_rabi_mhz = 10.0;

// transition shifts per unit of D strain: xy unchanged, yz and xz follow
constexpr std::array<double, 3> strain_pattern{0.0, 1.0, 1.0};

struct SiteContext {
  spin::Eigensystem es;
  spin::TransitionFrequencies freqs;
  kinetics::KineticRates rates_eff;  // zero-field rates projected onto field eigenstates
};

SiteContext make_context(const SimParams& p, const spin::Orientation& site) {
  SiteContext c;
  c.es = spin::site_eigensystem(p.zfs, site, p.b_lab_mt);
  c.freqs = spin::transition_frequencies(c.es);
  c.rates_eff = kinetics::project_rates(c.es, p.rates);
  return c;
}

spin::Pair nearest_pair(const spin::TransitionFrequencies& f, double freq_mhz,
                        std::vector<std::string>* warnings, const std::string& tone_name) {
  std::array<std::pair<double, spin::Pair>, 3> d{{
      {std::abs(f.xy_mhz - freq_mhz), spin::Pair::xy},
      {std::abs(f.yz_mhz - freq_mhz), spin::Pair::yz},
      {std::abs(f.xz_mhz - freq_mhz), spin::Pair::xz},
  }};
  std::sort(d.begin(), d.end(), [](auto& a, auto& b) { return a.first < b.first; });
  if (warnings && d[1].first - d[0].first < 1.0)
    warnings->push_back("tone " + tone_name + " sits between two transitions (" +
                        spin::pair_name(d[0].second) + " and " + spin::pair_name(d[1].second) +
                        "); assigning " + spin::pair_name(d[0].second));
  return d[0].second;
}

struct BoundTone {
  spin::Pair pair;
  double freq_mhz = 0.0;
  double rabi_mhz = 0.0;
};

void run_parallel(size_t n, int jobs, const std::function<void(size_t)>& work) {
  jobs = std::max(1, jobs);
  if (jobs > 1) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw > 0) jobs = std::min(jobs, int(hw));
  }
  if (jobs <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(size_t(jobs));
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed = true;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---- sequence executor ------------------------------------------------

double execute_bound(const seq::SequenceAst& ast, const SimParams& p, const SiteContext& ctx,
                     const std::map<std::string, BoundTone>& tones, const ExecOptions& opt) {
  // frame per pair: the first tone addressing it, nominal otherwise
  std::array<double, 3> frame{ctx.freqs.xy_mhz, ctx.freqs.yz_mhz, ctx.freqs.xz_mhz};
  std::array<bool, 3> frame_set{false, false, false};
  for (const auto& t : ast.tones) {
    const BoundTone& b = tones.at(t.name);
    if (!frame_set[int(b.pair)]) {
      frame[int(b.pair)] = b.freq_mhz;
      frame_set[int(b.pair)] = true;
    }
  }

  engine::PairDetunings deltas;
  std::array<double, 3> shifted;  // transition frequencies of this ensemble member
  for (int i = 0; i < 3; ++i) {
    shifted[size_t(i)] =
        ctx.freqs.of(spin::Pair(i)) + opt.strain_mhz * strain_pattern[size_t(i)];
    deltas[size_t(i)] = shifted[size_t(i)] - frame[size_t(i)];
  }

  const kinetics::KineticRates pumped = ctx.rates_eff.with_pump(p.pulsed_pump_rate);
  const kinetics::KineticRates dark = ctx.rates_eff.with_pump(0.0);
  const kinetics::Generator g_pumped = kinetics::rate_matrix(pumped);

  engine::HybridState s = engine::HybridState::ground();
  double pl = 0.0;
  for (const auto& st : ast.statements) {
    if (const auto* laser = std::get_if<seq::LaserStmt>(&st.node)) {
      s = engine::free_evolution(s, laser->duration_us, p.decoherence, pumped, deltas);
    } else if (const auto* wait = std::get_if<seq::WaitStmt>(&st.node)) {
      s = engine::free_evolution(s, wait->duration_us, p.decoherence, dark, deltas);
    } else if (const auto* mw = std::get_if<seq::MwStmt>(&st.node)) {
      if (opt.suppress_mw) continue;
      const BoundTone& b = tones.at(mw->tone);
      engine::MicrowavePulse pulse;
      pulse.pair = b.pair;
      pulse.rabi_mhz = b.rabi_mhz;
      pulse.duration_ns = mw->duration_ns;
      pulse.phase_rad = mw->phase_deg * deg2rad;
      pulse.detuning_mhz = shifted[size_t(int(b.pair))] - (b.freq_mhz + mw->detuning_mhz);
      s = engine::apply_pulse(s, pulse);
    } else if (const auto* read = std::get_if<seq::ReadStmt>(&st.node)) {
      kinetics::Populations n = s.populations();
      pl += kinetics::pl_integral(n, read->duration_us, g_pumped, pumped);
      s.rho.setZero();  // readout projects out any remaining coherence
      s.set_populations(kinetics::evolve(n, read->duration_us, g_pumped));
    }
  }
  return pl;
}

std::map<std::string, BoundTone> bind_tones(const seq::SequenceAst& ast, const SiteContext& ctx,
                                            std::vector<std::string>* warnings) {
  std::map<std::string, BoundTone> tones;
  for (const auto& t : ast.tones) {
    BoundTone b;
    b.freq_mhz = t.freq_mhz;
    b.rabi_mhz = t.rabi_mhz;
    b.pair = t.pair ? *t.pair : nearest_pair(ctx.freqs, t.freq_mhz, warnings, t.name);
    engine::MicrowavePulse probe;
    probe.pair = b.pair;
    probe.rabi_mhz = b.rabi_mhz;
    if (warnings && !engine::hard_pulse_valid(probe, ctx.freqs))
      warnings->push_back("tone " + t.name + ": Rabi frequency " + std::to_string(b.rabi_mhz) +
                          " MHz exceeds a tenth of the spectral gap, hard-pulse model "
                          "is inaccurate");
    tones[t.name] = b;
  }
  return tones;
}

double ensemble_pl(const seq::SequenceAst& ast, const SimParams& p, const SiteContext& ctx,
                   const std::map<std::string, BoundTone>& tones) {
  auto f = [&](double strain) {
    ExecOptions o;
    o.strain_mhz = strain;
    return execute_bound(ast, p, ctx, tones, o);
  };
  return quadrature::gaussian_average(f, p.decoherence.sigma_inh_mhz, p.quadrature_order);
}

// ---- preset construction helpers ---------------------------------------

seq::SequenceAst& operator<<(seq::SequenceAst& a, seq::ToneDecl t) {
  a.tones.push_back(std::move(t));
  return a;
}
template <class S>
seq::SequenceAst& operator<<(seq::SequenceAst& a, S stmt) {
  a.statements.push_back({std::move(stmt), {}});
  return a;
}

seq::ToneDecl make_tone(std::string name, double freq, double rabi, spin::Pair pair) {
  seq::ToneDecl t;
  t.name = std::move(name);
  t.freq_mhz = freq;
  t.rabi_mhz = rabi;
  t.pair = pair;
  return t;
}

struct Axis {
  double min, max;
  int points;
  std::vector<double> values() const {
    std::vector<double> v(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i)
      v[size_t(i)] = points == 1 ? min : min + (max - min) * double(i) / (points - 1);
    return v;
  }
};

Axis resolve(const AxisSpec& spec, double def_min, double def_max, int def_points) {
  Axis a;
  a.min = std::isnan(spec.min) ? def_min : spec.min;
  a.max = std::isnan(spec.max) ? def_max : spec.max;
  a.points = spec.points > 0 ? spec.points : def_points;
  if (a.points < 1) throw std::invalid_argument("experiment: axis needs at least 1 point");
  if (a.max < a.min) std::swap(a.max, a.min);
  return a;
}

FitSummary summarize(const fitting::DampedCosineResult& r, bool gaussian) {
  FitSummary s;
  s.model = gaussian ? "gaussian_damped_cosine" : "damped_cosine";
  s.values = {{"amplitude", r.amplitude},
              {"decay_time_us", r.decay_time},
              {"decay_time_sigma_us", r.decay_time_sigma},
              {"frequency_mhz", r.frequency},
              {"frequency_sigma_mhz", r.frequency_sigma},
              {"phase_rad", r.phase_rad},
              {"offset", r.offset}};
  if (r.time_origin != 0.0) s.values.emplace_back("time_origin_us", r.time_origin);
  s.rms_residual = r.rms_residual;
  s.iterations = r.iterations;
  s.converged = r.converged;
  return s;
}

FitSummary summarize(const fitting::ExponentialResult& r) {
  FitSummary s;
  s.model = "exponential";
  s.values = {{"amplitude", r.amplitude},
              {"decay_time_us", r.decay_time},
              {"decay_time_sigma_us", r.decay_time_sigma},
              {"offset", r.offset}};
  s.rms_residual = r.rms_residual;
  s.iterations = r.iterations;
  s.converged = r.converged;
  return s;
}

std::vector<double> trace_time_us(const Trace& t) {
  std::vector<double> out(t.x.size());
  const double scale = t.x_name.find("_ns") != std::string::npos ? 1e-3 : 1.0;
  for (size_t i = 0; i < t.x.size(); ++i) out[i] = t.x[i] * scale;
  return out;
}

// ---- analytic cw line shapes -------------------------------------------

struct CwLine {
  double freq_mhz;
  double contrast;
};

std::vector<CwLine> cw_lines(const SimParams& p, const spin::Vector3& b_lab) {
  std::vector<CwLine> lines;
  const std::array<spin::Orientation, 2> sites{
      spin::Orientation::identity(),
      spin::Orientation::about_lab_z(p.site_b_angle_deg * deg2rad)};
  kinetics::KineticRates pumped = p.rates.with_pump(p.cw_pump_rate);
  for (const auto& site : sites) {
    spin::Eigensystem es = spin::site_eigensystem(p.zfs, site, b_lab);
    spin::TransitionFrequencies f = spin::transition_frequencies(es);
    for (spin::Pair pair : {spin::Pair::xy, spin::Pair::yz, spin::Pair::xz}) {
      double c =
          kinetics::cw_odmr_contrast(p.zfs, pumped, pair, p.cw_mixing_rate, b_lab, site);
      lines.push_back({f.of(pair), 0.5 * c});
    }
  }
  return lines;
}

double cw_spectrum_at(const std::vector<CwLine>& lines, double f_mhz, double fwhm_mhz) {
  const double hwhm = 0.5 * fwhm_mhz;
  double y = 0.0;
  for (const auto& l : lines) {
    double u = (f_mhz - l.freq_mhz) / hwhm;
    y += l.contrast / (1.0 + u * u);
  }
  return y;
}

// ---- presets ------------------------------------------------------------

struct PresetContext {
  const SimParams& p;
  const ExperimentSpec& spec;
  SiteContext site;
};

PresetResult preset_cw_odmr(PresetContext& c) {
  Axis x = resolve(c.spec.x, 50.0, 1550.0, 751);
  auto lines = cw_lines(c.p, c.p.b_lab_mt);
  PresetResult r;
  r.trace.preset = c.spec.preset;
  r.trace.seed = c.spec.seed;
  r.trace.x = x.values();
  r.trace.x_name = "frequency_mhz";
  r.trace.y_name = "contrast";
  r.trace.y.resize(r.trace.x.size());
  for (size_t i = 0; i < r.trace.x.size(); ++i)
    r.trace.y[i] = cw_spectrum_at(lines, r.trace.x[i], c.p.cw_linewidth_mhz);
  return r;
}

PresetResult preset_field_map(PresetContext& c) {
  Axis bx = resolve(c.spec.x, 0.0, 100.0, 41);
  Axis fx = resolve(c.spec.x2, 0.0, 3200.0, 321);
  spin::Vector3 dir = c.p.map_direction.normalized();

  PresetResult r;
  r.trace.preset = c.spec.preset;
  r.trace.seed = c.spec.seed;
  r.trace.x_name = "field_mt";
  r.trace.x2_name = "frequency_mhz";
  r.trace.y_name = "contrast";
  auto bvals = bx.values();
  auto fvals = fx.values();
  r.trace.x.reserve(bvals.size() * fvals.size());
  r.trace.x2.reserve(bvals.size() * fvals.size());
  r.trace.y.resize(bvals.size() * fvals.size());

  std::atomic<bool> ambiguous{false};
  std::vector<std::vector<CwLine>> all_lines(bvals.size());
  run_parallel(bvals.size(), c.spec.jobs, [&](size_t i) {
    SimParams local = c.p;
    spin::Vector3 b = bvals[i] * dir;
    // track label ambiguity for the warning below
    for (const auto& site :
         {spin::Orientation::identity(),
          spin::Orientation::about_lab_z(c.p.site_b_angle_deg * deg2rad)}) {
      if (spin::site_eigensystem(c.p.zfs, site, b).ambiguous_labels) ambiguous = true;
    }
    all_lines[i] = cw_lines(local, b);
  });
  for (size_t i = 0; i < bvals.size(); ++i)
    for (size_t j = 0; j < fvals.size(); ++j) {
      r.trace.x.push_back(bvals[i]);
      r.trace.x2.push_back(fvals[j]);
      r.trace.y[i * fvals.size() + j] =
          cw_spectrum_at(all_lines[i], fvals[j], c.p.cw_linewidth_mhz);
    }
  if (ambiguous)
    r.warnings.push_back(
        "sublevel labels become ambiguous at some fields (near level crossings); "
        "line assignments there follow the dominant zero-field character");
  return r;
}

// one leg of a phase cycle: a sequence variant and its receiver weight
struct CycleStep {
  seq::SequenceAst ast;
  double weight;
};

// scan over per-point sequence variants combined with receiver weights
Trace cycled_scan(const PresetContext& c, const std::vector<double>& xvals,
                  const std::string& x_name,
                  const std::function<void(seq::SequenceAst&, double)>& bind_x,
                  const std::vector<CycleStep>& cycle, std::vector<std::string>* warnings) {
  auto tones = bind_tones(cycle.front().ast, c.site, warnings);
  Trace t;
  t.preset = c.spec.preset;
  t.seed = c.spec.seed;
  t.x = xvals;
  t.x_name = x_name;
  t.y_name = "contrast";
  t.y.resize(xvals.size());
  run_parallel(xvals.size(), c.spec.jobs, [&](size_t i) {
    seq::SequenceAst ref = cycle.front().ast;
    bind_x(ref, xvals[i]);
    ExecOptions ref_opt;
    ref_opt.suppress_mw = true;
    double pl_ref = execute_bound(ref, c.p, c.site, tones, ref_opt);
    if (pl_ref == 0.0) throw std::domain_error("experiment: reference PL is zero");
    double acc = 0.0;
    for (const auto& step : cycle) {
      seq::SequenceAst a = step.ast;
      bind_x(a, xvals[i]);
      acc += step.weight * ensemble_pl(a, c.p, c.site, tones);
    }
    t.y[i] = acc / pl_ref;
  });
  return t;
}

// scan a single-AST preset via its sweep declarations
Trace sweep_scan(const PresetContext& c, const seq::SequenceAst& ast,
                 std::vector<std::string>* warnings) {
  Trace t = run_sequence_scan(ast, c.p, c.spec.jobs, warnings);
  t.preset = c.spec.preset;
  t.seed = c.spec.seed;
  return t;
}

PresetResult preset_rabi(PresetContext& c, bool multilevel) {
  Axis x = resolve(c.spec.x, 0.0, 1000.0, 101);
  spin::Pair pair = multilevel ? spin::Pair::yz : c.spec.pair;
  double f_drive = c.site.freqs.of(pair);

  seq::SequenceAst ast;
  ast << make_tone("D", f_drive, c.spec.rabi_mhz, pair);
  if (multilevel) {
    double f_shelf = c.site.freqs.of(spin::Pair::xy);
    ast << make_tone("S", f_shelf, shelf_rabi_mhz, spin::Pair::xy);
  }
  ast << seq::LaserStmt{init_laser_us};
  double t_shelf = engine::pi_duration_ns(shelf_rabi_mhz);
  if (multilevel) ast << seq::MwStmt{"S", t_shelf, 0.0, 0.0};
  ast << seq::MwStmt{"D", 0.0, 0.0, 0.0};
  if (multilevel) ast << seq::MwStmt{"S", t_shelf, 0.0, 0.0};
  ast << seq::WaitStmt{c.p.readout_delay_us} << seq::ReadStmt{c.p.readout_window_us};
  seq::SweepDecl sw;
  sw.path = {"mw", multilevel ? 1 : 0, "duration"};
  sw.start = x.min;
  sw.stop = x.max;
  sw.steps = x.points;
  ast.sweeps.push_back(sw);

  PresetResult r;
  r.trace = sweep_scan(c, ast, &r.warnings);
  r.trace.x_name = "duration_ns";
  add_noise(r.trace, c.spec.noise, c.spec.seed);
  fitting::CosineFitOptions fopt;
  fopt.seed = c.spec.seed;
  r.fit = summarize(fit_trace_damped_cosine(r.trace, fopt), false);
  return r;
}

PresetResult preset_chevron(PresetContext& c) {
  Axis x = resolve(c.spec.x, 0.0, 1000.0, 81);
  Axis d = resolve(c.spec.x2, -15.0, 15.0, 31);
  double f_drive = c.site.freqs.of(c.spec.pair);

  seq::SequenceAst ast;
  ast << make_tone("D", f_drive, c.spec.rabi_mhz, c.spec.pair);
  ast << seq::LaserStmt{init_laser_us} << seq::MwStmt{"D", 0.0, 0.0, 0.0}
      << seq::WaitStmt{c.p.readout_delay_us} << seq::ReadStmt{c.p.readout_window_us};
  seq::SweepDecl s1;
  s1.path = {"mw", 0, "duration"};
  s1.start = x.min;
  s1.stop = x.max;
  s1.steps = x.points;
  seq::SweepDecl s2;
  s2.path = {"mw", 0, "detuning"};
  s2.start = d.min;
  s2.stop = d.max;
  s2.steps = d.points;
  ast.sweeps.push_back(s1);
  ast.sweeps.push_back(s2);

  PresetResult r;
  r.trace = sweep_scan(c, ast, &r.warnings);
  r.trace.x_name = "duration_ns";
  r.trace.x2_name = "detuning_mhz";
  add_noise(r.trace, c.spec.noise, c.spec.seed);
  return r;
}

PresetResult preset_pulsed_odmr(PresetContext& c) {
  double f0 = c.site.freqs.of(c.spec.pair);
  Axis x = resolve(c.spec.x, f0 - 25.0, f0 + 25.0, 101);

  seq::SequenceAst ast;
  ast << make_tone("D", f0, c.spec.rabi_mhz, c.spec.pair);
  ast << seq::LaserStmt{init_laser_us}
      << seq::MwStmt{"D", engine::pi_duration_ns(c.spec.rabi_mhz), 0.0, 0.0}
      << seq::WaitStmt{c.p.readout_delay_us} << seq::ReadStmt{c.p.readout_window_us};
  seq::SweepDecl sw;
  sw.path = {"tone", 0, "freq"};
  sw.start = x.min;
  sw.stop = x.max;
  sw.steps = x.points;
  ast.sweeps.push_back(sw);

  PresetResult r;
  // frequency sweep must not re-bind the tone pair per point
  r.trace = sweep_scan(c, ast, &r.warnings);
  r.trace.x_name = "frequency_mhz";
  add_noise(r.trace, c.spec.noise, c.spec.seed);
  return r;
}

PresetResult preset_power(PresetContext& c) {
  Axis x = resolve(c.spec.x, 0.5, 8.0, 16);
  PresetResult r;
  r.trace.preset = c.spec.preset;
  r.trace.seed = c.spec.seed;
  r.trace.x = x.values();
  r.trace.x_name = "power";
  r.trace.y_name = "rabi_mhz";
  r.trace.y.resize(r.trace.x.size());
  std::vector<std::string> warn_first;

  run_parallel(r.trace.x.size(), c.spec.jobs, [&](size_t i) {
    double omega = c.p.drive_kappa * std::sqrt(r.trace.x[i]);
    ExperimentSpec inner = c.spec;
    inner.preset = "rabi";
    inner.rabi_mhz = omega;
    inner.jobs = 1;
    inner.seed = c.spec.seed + i;
    inner.x = AxisSpec{0.0, 3.0 * 1000.0 / omega, 61};  // three Rabi periods
    PresetContext cc{c.p, inner, c.site};
    PresetResult rr = preset_rabi(cc, false);
    if (i == 0) warn_first = rr.warnings;
    for (auto& [k, v] : rr.fit->values)
      if (k == "frequency_mhz") r.trace.y[i] = v;
  });
  r.warnings = std::move(warn_first);
  return r;
}

PresetResult preset_ramsey(PresetContext& c) {
  Axis x = resolve(c.spec.x, 0.01, 1.5, 76);
  spin::Pair pair = c.spec.pair;
  double f_tone = c.site.freqs.of(pair) - c.spec.ramsey_detuning_mhz;
  double t_half_pi = 0.5 * engine::pi_duration_ns(c.spec.rabi_mhz);

  auto build = [&](double final_phase_deg) {
    seq::SequenceAst a;
    a << make_tone("D", f_tone, c.spec.rabi_mhz, pair);
    a << seq::LaserStmt{init_laser_us} << seq::MwStmt{"D", t_half_pi, 0.0, 0.0}
      << seq::WaitStmt{0.0} << seq::MwStmt{"D", t_half_pi, final_phase_deg, 0.0}
      << seq::WaitStmt{c.p.readout_delay_us} << seq::ReadStmt{c.p.readout_window_us};
    return a;
  };
  std::vector<CycleStep> cycle;
  cycle.push_back({build(0.0), 1.0});
  cycle.push_back({build(180.0), -1.0});
  auto bind_x = [](seq::SequenceAst& a, double tau) {
    seq::set_parameter(a, {"wait", 0, "duration"}, tau);
  };

  PresetResult r;
  r.trace = cycled_scan(c, x.values(), "tau_us", bind_x, cycle, &r.warnings);
  add_noise(r.trace, c.spec.noise, c.spec.seed);
  fitting::CosineFitOptions fopt;
  fopt.gaussian_envelope = true;
  fopt.fixed_rate = 1.0 / c.p.decoherence.t2(pair);
  fopt.fit_time_origin = true;  // finite pulses shift the envelope centre
  fopt.seed = c.spec.seed;
  r.fit = summarize(fit_trace_damped_cosine(r.trace, fopt), true);
  return r;
}

PresetResult preset_hahn(PresetContext& c, bool multilevel) {
  Axis x = resolve(c.spec.x, 0.05, multilevel ? 6.0 : 5.0, 41);
  spin::Pair pair = multilevel ? spin::Pair::yz : c.spec.pair;
  double f_drive = c.site.freqs.of(pair);
  double t_pi = engine::pi_duration_ns(c.spec.rabi_mhz);
  double t_shelf = engine::pi_duration_ns(shelf_rabi_mhz);

  auto build = [&](double pi_phase_deg) {
    seq::SequenceAst a;
    a << make_tone("D", f_drive, c.spec.rabi_mhz, pair);
    if (multilevel)
      a << make_tone("S", c.site.freqs.of(spin::Pair::xy), shelf_rabi_mhz, spin::Pair::xy);
    a << seq::LaserStmt{init_laser_us};
    if (multilevel) a << seq::MwStmt{"S", t_shelf, 0.0, 0.0};
    a << seq::MwStmt{"D", 0.5 * t_pi, 0.0, 0.0} << seq::WaitStmt{0.0}
      << seq::MwStmt{"D", t_pi, pi_phase_deg, 0.0} << seq::WaitStmt{0.0}
      << seq::MwStmt{"D", 0.5 * t_pi, 0.0, 0.0};
    if (multilevel) a << seq::MwStmt{"S", t_shelf, 0.0, 0.0};
    a << seq::WaitStmt{c.p.readout_delay_us} << seq::ReadStmt{c.p.readout_window_us};
    return a;
  };
  // four-step cycle on the refocusing pulse (EXORCYCLE): only signal the
  // pi pulse inverts survives, so magnetization it failed to refocus and
  // transients it creates cancel instead of beating against the echo
  std::vector<CycleStep> cycle;
  cycle.push_back({build(90.0), 0.5});
  cycle.push_back({build(180.0), -0.5});
  cycle.push_back({build(270.0), 0.5});
  cycle.push_back({build(0.0), -0.5});
  auto bind_x = [](seq::SequenceAst& a, double total) {
    seq::set_parameter(a, {"wait", 0, "duration"}, total / 2.0);
    seq::set_parameter(a, {"wait", 1, "duration"}, total / 2.0);
  };

  PresetResult r;
  r.trace = cycled_scan(c, x.values(), "total_tau_us", bind_x, cycle, &r.warnings);
  add_noise(r.trace, c.spec.noise, c.spec.seed);
  r.fit = summarize(fit_trace_exponential(r.trace));
  return r;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "cw-odmr", "field-map",       "rabi",           "chevron",        "power",
      "ramsey",  "hahn",            "pulsed-odmr",    "multilevel-rabi", "multilevel-hahn"};
  return names;
}

double differential_signal(double pl_sequence, double pl_reference) {
  if (pl_reference == 0.0)
    throw std::domain_error("experiment: reference PL is zero, contrast undefined");
  return (pl_sequence - pl_reference) / pl_reference;
}

double execute_sequence(const seq::SequenceAst& ast, const SimParams& params,
                        const ExecOptions& opt, std::vector<std::string>* warnings) {
  SiteContext ctx = make_context(params, spin::Orientation::identity());
  auto tones = bind_tones(ast, ctx, warnings);
  return execute_bound(ast, params, ctx, tones, opt);
}

double sequence_contrast(const seq::SequenceAst& ast, const SimParams& params,
                         std::vector<std::string>* warnings) {
  SiteContext ctx = make_context(params, spin::Orientation::identity());
  auto tones = bind_tones(ast, ctx, warnings);
  ExecOptions ref_opt;
  ref_opt.suppress_mw = true;
  double pl_ref = execute_bound(ast, params, ctx, tones, ref_opt);
  double pl = ensemble_pl(ast, params, ctx, tones);
  return differential_signal(pl, pl_ref);
}

Trace run_sequence_scan(const seq::SequenceAst& ast, const SimParams& params, int jobs,
                        std::vector<std::string>* warnings) {
  SiteContext ctx = make_context(params, spin::Orientation::identity());
  auto concrete = seq::expand_sweeps(ast);
  // tone binding is frequency-dependent; bind per expanded sequence but
  // collect warnings only once, from the first point
  if (warnings) bind_tones(concrete.front(), ctx, warnings);

  Trace t;
  t.y_name = "contrast";
  t.y.resize(concrete.size());
  if (!ast.sweeps.empty()) {
    auto outer = ast.sweeps[0].values();
    t.x_name = ast.sweeps[0].path.str();
    if (ast.sweeps.size() == 1) {
      t.x = outer;
    } else {
      auto inner = ast.sweeps[1].values();
      t.x2_name = ast.sweeps[1].path.str();
      t.x.reserve(concrete.size());
      t.x2.reserve(concrete.size());
      for (double vo : outer)
        for (double vi : inner) {
          t.x.push_back(vo);
          t.x2.push_back(vi);
        }
    }
  }
  run_parallel(concrete.size(), jobs, [&](size_t i) {
    auto tones = bind_tones(concrete[i], ctx, nullptr);
    ExecOptions ref_opt;
    ref_opt.suppress_mw = true;
    double pl_ref = execute_bound(concrete[i], params, ctx, tones, ref_opt);
    double pl = ensemble_pl(concrete[i], params, ctx, tones);
    t.y[i] = differential_signal(pl, pl_ref);
  });
  return t;
}

void add_noise(Trace& t, double level, std::uint64_t seed) {
  if (level <= 0.0 || t.y.empty()) return;
  double peak = 0.0;
  for (double v : t.y) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) peak = 1.0;
  const double scale = level * peak;
  for (size_t i = 0; i < t.y.size(); ++i) {
    // one generator per point: identical output for any thread count
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
    std::normal_distribution<double> n(0.0, scale);
    t.y[i] += n(rng);
  }
}

fitting::DampedCosineResult fit_trace_damped_cosine(const Trace& t,
                                                    const fitting::CosineFitOptions& opt) {
  std::vector<double> tt = trace_time_us(t);
  return fitting::fit_damped_cosine(tt, t.y, opt);
}

fitting::ExponentialResult fit_trace_exponential(const Trace& t) {
  std::vector<double> tt = trace_time_us(t);
  return fitting::fit_exponential(tt, t.y, {});
}

PresetResult run_preset(const SimParams& params, const ExperimentSpec& spec) {
  params.validate();
  PresetContext c{params, spec, make_context(params, spin::Orientation::identity())};
  PresetResult r;
  if (spec.preset == "cw-odmr")
    r = preset_cw_odmr(c);
  else if (spec.preset == "field-map")
    r = preset_field_map(c);
  else if (spec.preset == "rabi")
    r = preset_rabi(c, false);
  else if (spec.preset == "multilevel-rabi")
    r = preset_rabi(c, true);
  else if (spec.preset == "chevron")
    r = preset_chevron(c);
  else if (spec.preset == "power")
    r = preset_power(c);
  else if (spec.preset == "ramsey")
    r = preset_ramsey(c);
  else if (spec.preset == "hahn")
    r = preset_hahn(c, false);
  else if (spec.preset == "multilevel-hahn")
    r = preset_hahn(c, true);
  else if (spec.preset == "pulsed-odmr")
    r = preset_pulsed_odmr(c);
  else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + spec.preset + "' (known: " + known + ")");
  }
  r.trace.preset = spec.preset;
  r.trace.seed = spec.seed;
  return r;
}

}  // namespace odmr::experiments
