#pragma once

#include <string>
#include <vector>

// Volume-normalised magnetometry sensitivity for an ensemble of
// optically read out spins:
//
//   eta^V = alpha * (hbar e / (g_e mu_B)) * 1 / (C sqrt(rho_S n_avg))
//           * sqrt(t_overhead) / T
//
// alpha = 1 for DC (T = T2*), pi/2 for AC (T = T2). rho_S is the spin
// number density, Z_cell / V_cell * doping. Results in
// nT um^{3/2} Hz^{-1/2}.

namespace odmr::sensing {

enum class Mode { dc, ac };

struct SensingParams {
  Mode mode = Mode::dc;
  double contrast = 0.05;       // optical spin contrast C, fraction
  double doping = 1e-3;         // c_S, mol/mol
  double n_avg = 1e-3;          // photons collected per spin per readout
  double t_overhead_us = 350.0; // initialisation + readout + reset
  double coherence_us = 0.12;   // T2* for DC, T2 for AC
  double z_cell = 2.0;          // molecules per host unit cell
  double v_cell_a3 = 617.0;     // unit cell volume, cubic Angstrom

  void validate() const;  // throws std::invalid_argument
};

// spins per um^3
double spin_density_per_um3(double doping, double z_cell, double v_cell_a3);

struct SensitivityResult {
  double eta_v_nt_um32 = 0.0;  // nT um^{3/2} Hz^{-1/2}
  double rho_s_per_um3 = 0.0;
  double alpha = 1.0;
};

SensitivityResult eta_v(const SensingParams& p);

enum class SweepAxis { contrast, doping, n_avg, t_overhead, coherence };
SweepAxis axis_from_name(const std::string& name);  // throws on unknown
const char* axis_name(SweepAxis a);

struct SweepPoint {
  double value;
  double eta_v_nt_um32;
};
std::vector<SweepPoint> sweep_eta(SensingParams p, SweepAxis axis, double start, double stop,
                                  int steps, bool log_spaced = false);

// Named parameter sets matching the measured film and crystal and one
// optimistic projection; coherence_us is picked per mode.
struct SensingProfile {
  std::string name;
  SensingParams params;      // mode dc by default
  double t2star_us = 0.0;    // used when mode = dc
  double t2_us = 0.0;        // used when mode = ac
  SensingParams with_mode(Mode m) const;
};
const std::vector<SensingProfile>& builtin_profiles();
const SensingProfile& profile_by_name(const std::string& name);  // throws on unknown

}  // namespace odmr::sensing
