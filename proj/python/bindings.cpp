#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "odmr/experiments.hpp"
#include "odmr/kinetics.hpp"
#include "odmr/params.hpp"
#include "odmr/seqlang.hpp"
#include "odmr/sensitivity.hpp"
#include "odmr/spin.hpp"

namespace py = pybind11;

namespace {

odmr::SimParams params_for(const std::string& profile) {
  odmr::SimParams p;
  if (profile == "crystal") {
    p.decoherence.sigma_inh_mhz = odmr::sigma_mhz_from_t2star(0.39);
    return p;
  }
  if (profile == "film") {
    p.decoherence.t2_us = {0.75, 0.75, 0.75};
    p.decoherence.sigma_inh_mhz = odmr::sigma_mhz_from_t2star(0.12);
    return p;
  }
  throw std::invalid_argument("unknown profile '" + profile + "' (crystal or film)");
}

py::dict transitions(double d_mhz, double e_mhz, double b_lab_z_mt) {
  odmr::spin::ZfsParameters zfs{d_mhz, e_mhz};
  odmr::spin::Vector3 b = odmr::spin::Vector3::Zero();
  b.z() = b_lab_z_mt;
  auto es = odmr::spin::site_eigensystem(zfs, odmr::spin::Orientation::identity(), b);
  auto f = odmr::spin::transition_frequencies(es);
  py::dict out;
  out["xy_mhz"] = f.xy_mhz;
  out["yz_mhz"] = f.yz_mhz;
  out["xz_mhz"] = f.xz_mhz;
  return out;
}

double cw_contrast(const std::string& pair, const std::string& profile, double mixing_rate) {
  odmr::SimParams p = params_for(profile);
  auto rates = p.rates.with_pump(p.cw_pump_rate);
  return odmr::kinetics::cw_odmr_contrast(p.zfs, rates, odmr::spin::pair_from_name(pair),
                                          mixing_rate);
}

py::dict sensitivity(const std::string& profile, const std::string& mode) {
  const auto& prof = odmr::sensing::profile_by_name(profile);
  odmr::sensing::Mode m;
  if (mode == "dc")
    m = odmr::sensing::Mode::dc;
  else if (mode == "ac")
    m = odmr::sensing::Mode::ac;
  else
    throw std::invalid_argument("mode must be 'dc' or 'ac'");
  auto r = odmr::sensing::eta_v(prof.with_mode(m));
  py::dict out;
  out["eta_v_nt_um32"] = r.eta_v_nt_um32;
  out["rho_s_per_um3"] = r.rho_s_per_um3;
  out["alpha"] = r.alpha;
  return out;
}

py::dict run_preset(const std::string& preset, const std::string& profile,
                    const std::string& pair, double rabi_mhz, int points, double noise,
                    std::uint64_t seed, int jobs) {
  odmr::SimParams params = params_for(profile);
  odmr::experiments::ExperimentSpec spec;
  spec.preset = preset;
  spec.pair = odmr::spin::pair_from_name(pair);
  spec.rabi_mhz = rabi_mhz;
  if (points > 0) spec.x.points = points;
  spec.noise = noise;
  spec.seed = seed;
  spec.jobs = jobs;
  auto result = odmr::experiments::run_preset(params, spec);
  py::dict out;
  out["x"] = result.trace.x;
  out["y"] = result.trace.y;
  if (result.trace.two_d()) out["x2"] = result.trace.x2;
  out["x_name"] = result.trace.x_name;
  out["y_name"] = result.trace.y_name;
  out["preset"] = result.trace.preset;
  if (result.fit) {
    py::dict fit;
    fit["model"] = result.fit->model;
    for (const auto& [k, v] : result.fit->values) fit[py::str(k)] = v;
    fit["converged"] = result.fit->converged;
    out["fit"] = fit;
  }
  out["warnings"] = result.warnings;
  return out;
}

std::string format_sequence(const std::string& text) {
  auto parsed = odmr::seq::parse(text);
  if (!parsed.ok()) {
    std::string msg = "sequence errors:";
    for (const auto& d : parsed.diagnostics)
      msg += "\n  " + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) + ": " +
             d.message;
    throw std::invalid_argument(msg);
  }
  return odmr::seq::print(*parsed.ast);
}

std::vector<std::string> sequence_errors(const std::string& text) {
  auto parsed = odmr::seq::parse(text);
  std::vector<std::string> out;
  for (const auto& d : parsed.diagnostics)
    out.push_back(std::to_string(d.pos.line) + ":" + std::to_string(d.pos.col) + ": " +
                  d.message);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "triplet-spin optically detected magnetic resonance simulator";
  m.attr("__version__") = "0.1.0";

  m.def("transitions", &transitions, py::arg("d_mhz") = 1396.0, py::arg("e_mhz") = -53.0,
        py::arg("b_lab_z_mt") = 0.0,
        "zero-field-split transition frequencies (MHz) for one site");
  m.def("cw_contrast", &cw_contrast, py::arg("pair") = "xz", py::arg("profile") = "crystal",
        py::arg("mixing_rate") = 1.0,
        "steady-state cw contrast (PL_on - PL_off)/PL_off for one pair");
  m.def("sensitivity", &sensitivity, py::arg("profile") = "film", py::arg("mode") = "dc",
        "volume-normalised magnetic sensitivity for a named profile");
  m.def("run_preset", &run_preset, py::arg("preset"), py::arg("profile") = "crystal",
        py::arg("pair") = "xz", py::arg("rabi_mhz") = 5.0, py::arg("points") = 0,
        py::arg("noise") = 0.0, py::arg("seed") = 1, py::arg("jobs") = 1,
        "run an experiment preset; returns axes, trace and fit");
  m.def("preset_names", [] { return odmr::experiments::preset_names(); },
        "names accepted by run_preset");
  m.def("format_sequence", &format_sequence, py::arg("text"),
        "parse a pulse-sequence program and return its canonical form");
  m.def("sequence_errors", &sequence_errors, py::arg("text"),
        "diagnostics for a pulse-sequence program (empty if valid)");
}
