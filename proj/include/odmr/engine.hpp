#pragma once

#include <Eigen/Dense>
#include <array>

#include "odmr/kinetics.hpp"
#include "odmr/spin.hpp"

// Hybrid quantum-classical state for pulsed experiments: classical
// populations for the singlets, a density matrix for the triplet
// sublevels. The triplet block is kept in the zero-field label basis
// (x, y, z). Microwave pulses are hard pulses in the rotating frame of
// the tone addressing one pair; between pulses each pair coherence
// evolves in its own tone frame, so only detunings accumulate phase.

namespace odmr::engine {

struct HybridState {
  double n_s0 = 1.0;
  double n_s1 = 0.0;
  Eigen::Matrix3cd rho = Eigen::Matrix3cd::Zero();  // triplet block, (x, y, z)

  double total() const { return n_s0 + n_s1 + rho.trace().real(); }
  Eigen::Vector3d triplet_populations() const { return rho.diagonal().real(); }
  kinetics::Populations populations() const;
  void set_populations(const kinetics::Populations& n);
  static HybridState ground() { return {}; }
};

// Rotating-frame hard pulse on one sublevel pair. detuning_mhz is the
// actual transition frequency minus the drive frequency; phase_rad
// picks the rotation axis in the equatorial plane.
struct MicrowavePulse {
  spin::Pair pair = spin::Pair::xz;
  double rabi_mhz = 0.0;
  double duration_ns = 0.0;
  double phase_rad = 0.0;
  double detuning_mhz = 0.0;
};

// U = exp(-i 2 pi H_eff t) with H_eff = (d/2) sz + (W/2)(cos p sx + sin p sy)
// embedded in the 3x3 triplet block; singlet populations untouched.
HybridState apply_pulse(const HybridState& s, const MicrowavePulse& pulse);

// Ideal instantaneous rotation (detuning ignored), for algebra checks.
HybridState apply_ideal_rotation(const HybridState& s, spin::Pair pair, double angle_rad,
                                 double phase_rad = 0.0);

// Hard-pulse validity: Omega at most a tenth of the smallest spectral
// gap between the addressed transition and the other two.
bool hard_pulse_valid(const MicrowavePulse& pulse, const spin::TransitionFrequencies& f);

// pi-pulse duration for a resonant pulse, ns.
double pi_duration_ns(double rabi_mhz);

struct Decoherence {
  std::array<double, 3> t2_us{1.17, 1.56, 1.17};  // per pair (xy, yz, xz), total T2
  double sigma_inh_mhz = 0.0;                     // Gaussian spread of the D strain

  double t2(spin::Pair p) const { return t2_us[int(p)]; }
};

// Per-pair frame detunings in MHz (phase accumulation rates of the
// pair coherences during free evolution).
using PairDetunings = std::array<double, 3>;

// Shifts of the three transitions caused by a D-strain sample s:
// xy unchanged, yz and xz shifted by s.
constexpr PairDetunings strain_shifts(double s_mhz) { return {0.0, s_mhz, s_mhz}; }

// Free evolution for t_us: populations follow the classical rate
// equations (exact exponential, pump as supplied in rates), coherences
// decay with their pair T2 and rotate at their frame detuning.
HybridState free_evolution(const HybridState& s, double t_us, const Decoherence& dec,
                           const kinetics::KineticRates& rates,
                           const PairDetunings& deltas = {0.0, 0.0, 0.0});

// Optical readout: drop coherences, relax in the dark for t_delay_us,
// then integrate PL over t_read_us with the pump in `rates` on.
double readout(const HybridState& s, const kinetics::KineticRates& rates, double t_delay_us,
               double t_read_us);

// Oracle-grade lab-frame propagation of the triplet block under
// H(t) = diag(e_mhz) + W cos(2 pi f t + phase) C_pair, no rotating-wave
// approximation; classic RK4 with steps_per_period per carrier cycle.
Eigen::Matrix3cd lab_frame_propagate(const Eigen::Matrix3cd& rho0,
                                     const Eigen::Vector3d& energies_mhz, spin::Pair pair,
                                     double carrier_mhz, double rabi_mhz, double duration_ns,
                                     double phase_rad = 0.0, int steps_per_period = 40);

}  // namespace odmr::engine
