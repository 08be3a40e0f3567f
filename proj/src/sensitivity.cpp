#include "odmr/sensitivity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "odmr/constants.hpp"

namespace odmr::sensing {

void SensingParams::validate() const {
  if (contrast <= 0.0 || contrast > 1.0)
    throw std::invalid_argument("sensing: contrast must be in (0, 1]");
  if (doping <= 0.0 || doping > 1.0)
    throw std::invalid_argument("sensing: doping must be in (0, 1] mol/mol");
  if (n_avg <= 0.0) throw std::invalid_argument("sensing: n_avg must be > 0");
  if (t_overhead_us < 0.0) throw std::invalid_argument("sensing: overhead time must be >= 0");
  if (coherence_us <= 0.0) throw std::invalid_argument("sensing: coherence time must be > 0");
  if (z_cell < 1.0) throw std::invalid_argument("sensing: z_cell must be >= 1");
  if (v_cell_a3 <= 0.0) throw std::invalid_argument("sensing: unit cell volume must be > 0");
}

double spin_density_per_um3(double doping, double z_cell, double v_cell_a3) {
  // A^3 -> um^3 is 1e-12
  return z_cell / (v_cell_a3 * 1e-12) * doping;
}

SensitivityResult eta_v(const SensingParams& p) {
  p.validate();
  SensitivityResult r;
  r.alpha = p.mode == Mode::dc ? 1.0 : std::numbers::pi / 2.0;
  r.rho_s_per_um3 = spin_density_per_um3(p.doping, p.z_cell, p.v_cell_a3);

  const double rho_m3 = p.z_cell / (p.v_cell_a3 * 1e-30) * p.doping;
  const double hbar_e_over_gmub = constants::hbar_j_s * constants::euler_e /
                                  (constants::g_electron * constants::bohr_magneton_j_per_t);
  const double t_overhead_s = p.t_overhead_us * 1e-6;
  const double coherence_s = p.coherence_us * 1e-6;
  const double eta_t_m32 = r.alpha * hbar_e_over_gmub /
                           (p.contrast * std::sqrt(rho_m3 * p.n_avg)) *
                           std::sqrt(t_overhead_s) / coherence_s;
  r.eta_v_nt_um32 = eta_t_m32 * constants::t_m32_to_nt_um32;
  return r;
}

SweepAxis axis_from_name(const std::string& name) {
  if (name == "contrast") return SweepAxis::contrast;
  if (name == "doping") return SweepAxis::doping;
  if (name == "n_avg") return SweepAxis::n_avg;
  if (name == "t_overhead") return SweepAxis::t_overhead;
  if (name == "coherence") return SweepAxis::coherence;
  throw std::invalid_argument(
      "sensing: unknown sweep axis '" + name +
      "' (expected contrast, doping, n_avg, t_overhead or coherence)");
}

const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::contrast: return "contrast";
    case SweepAxis::doping: return "doping";
    case SweepAxis::n_avg: return "n_avg";
    case SweepAxis::t_overhead: return "t_overhead";
    default: return "coherence";
  }
}

std::vector<SweepPoint> sweep_eta(SensingParams p, SweepAxis axis, double start, double stop,
                                  int steps, bool log_spaced) {
  if (steps < 1) throw std::invalid_argument("sensing: sweep needs at least 1 step");
  if (log_spaced && (start <= 0.0 || stop <= 0.0))
    throw std::invalid_argument("sensing: log sweep endpoints must be > 0");
  std::vector<SweepPoint> out;
  out.reserve(size_t(steps));
  for (int i = 0; i < steps; ++i) {
    double f = steps == 1 ? 0.0 : double(i) / (steps - 1);
    double v = log_spaced ? start * std::pow(stop / start, f) : start + (stop - start) * f;
    switch (axis) {
      case SweepAxis::contrast: p.contrast = v; break;
      case SweepAxis::doping: p.doping = v; break;
      case SweepAxis::n_avg: p.n_avg = v; break;
      case SweepAxis::t_overhead: p.t_overhead_us = v; break;
      case SweepAxis::coherence: p.coherence_us = v; break;
    }
    out.push_back({v, eta_v(p).eta_v_nt_um32});
  }
  return out;
}

SensingParams SensingProfile::with_mode(Mode m) const {
  SensingParams p = params;
  p.mode = m;
  p.coherence_us = m == Mode::dc ? t2star_us : t2_us;
  return p;
}

const std::vector<SensingProfile>& builtin_profiles() {
  static const std::vector<SensingProfile> profiles = [] {
    std::vector<SensingProfile> v;
    {
      SensingProfile film;
      film.name = "film";
      film.params.contrast = 0.05;
      film.params.doping = 1e-3;
      film.params.n_avg = 1e-3;
      film.params.t_overhead_us = 350.0;
      film.t2star_us = 0.12;
      film.t2_us = 0.75;
      v.push_back(film);
    }
    {
      SensingProfile crystal;
      crystal.name = "crystal";
      crystal.params.contrast = 0.05;
      crystal.params.doping = 1e-4;
      crystal.params.n_avg = 1e-3;
      crystal.params.t_overhead_us = 350.0;
      crystal.t2star_us = 0.39;
      crystal.t2_us = 1.17;
      v.push_back(crystal);
    }
    {
      SensingProfile projected;
      projected.name = "projected";
      projected.params.contrast = 0.3;
      projected.params.doping = 1e-4;
      projected.params.n_avg = 0.01;
      projected.params.t_overhead_us = 10.0;
      projected.t2star_us = 1.0;
      projected.t2_us = 4.0;
      v.push_back(projected);
    }
    return v;
  }();
  return profiles;
}

const SensingProfile& profile_by_name(const std::string& name) {
  for (const auto& p : builtin_profiles())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : builtin_profiles()) known += (known.empty() ? "" : ", ") + p.name;
  throw std::invalid_argument("sensing: unknown profile '" + name + "' (known: " + known + ")");
}

}  // namespace odmr::sensing
