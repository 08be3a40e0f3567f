#pragma once

#include <cmath>

#include "odmr/engine.hpp"
#include "odmr/kinetics.hpp"
#include "odmr/spin.hpp"

// Full physical parameter set for one simulated sample, with defaults
// describing a pentacene-doped p-terphenyl crystal.

namespace odmr {

struct SimParams {
  spin::ZfsParameters zfs{1396.0, -53.0};

  // optical cycle; pump_rate inside `rates` is a placeholder, the two
  // calibrated pump rates below are substituted per context
  kinetics::KineticRates rates{};
  double cw_pump_rate = 6.6e-4;     // weak cw illumination, 1/us
  double pulsed_pump_rate = 0.046;  // init/readout laser pulses, 1/us

  engine::Decoherence decoherence{};  // T2 per pair (us) + inhomogeneous spread (MHz)

  // cw-ODMR line model
  double cw_mixing_rate = 1.0;     // saturated incoherent driving, 1/us
  double cw_linewidth_mhz = 20.0;  // FWHM of the Lorentzian line

  // pulsed readout
  double readout_delay_us = 50.0;
  double readout_window_us = 10.0;

  // field and sites
  spin::Vector3 b_lab_mt = spin::Vector3::Zero();
  double site_b_angle_deg = 60.0;  // second inequivalent site, rotation about lab Z
  spin::Vector3 map_direction{1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};

  double drive_kappa = 2.0;  // Rabi frequency per sqrt(drive power), MHz

  int quadrature_order = 21;

  // throws std::invalid_argument on inconsistent values; returns
  // advisory notes (unconventional |E| > |D|/3 and similar)
  std::vector<std::string> validate() const;
};

// T2* of a Gaussian inhomogeneous ensemble and back.
double t2star_us_from_sigma(double sigma_mhz);
double sigma_mhz_from_t2star(double t2star_us);

}  // namespace odmr
