#pragma once

#include <Eigen/Dense>
#include <optional>

#include "odmr/spin.hpp"

// Classical population kinetics of the optical cycle:
// S0 --pump--> S1 --(1-phi) fluorescence--> S0
//                \--phi ISC--> {Tx, Ty, Tz} (branching p_i)
// each sublevel decays back to S0 at k_i = 1/tau_i.
// Populations are ordered (S0, S1, Tx, Ty, Tz); rates in 1/us.

namespace odmr::kinetics {

using Populations = Eigen::Matrix<double, 5, 1>;
using Generator = Eigen::Matrix<double, 5, 5>;

struct KineticRates {
  double pump_rate = 0.0;       // S0 -> S1, 1/us
  double s1_decay_rate = 100.0; // total S1 decay, 1/us (10 ns lifetime)
  double isc_yield = 0.63;      // fraction of S1 decays entering the triplet
  Eigen::Vector3d branching{0.76, 0.16, 0.08};  // ISC shares per sublevel
  Eigen::Vector3d depop_rates{1.0 / 35.0, 1.0 / 120.0, 1.0 / 250.0};  // k_i, 1/us

  void validate() const;  // throws std::invalid_argument
  KineticRates with_pump(double rate) const {
    KineticRates r = *this;
    r.pump_rate = rate;
    return r;
  }
};

// Incoherent microwave mixing of one sublevel pair at rate w (1/us),
// the cw-ODMR driving term.
struct MicrowaveMixing {
  spin::Pair pair;
  double rate;  // 1/us
};

// Continuous-time rate matrix G with column sums zero: dn/dt = G n.
Generator rate_matrix(const KineticRates& rates,
                      const std::optional<MicrowaveMixing>& mixing = std::nullopt);

// Propagate populations for t_us (exact matrix exponential).
Populations evolve(const Populations& n0, double t_us, const Generator& g);

// Nontrivial steady state, normalised to sum 1. Throws if the null
// space is not one-dimensional (disconnected kinetics).
Populations steady_state(const Generator& g);

// Instantaneous photoluminescence rate (fluorescence photons per us).
double pl_rate(const Populations& n, const KineticRates& rates);

// Time integral of the PL rate over [0, t_us] starting from n0.
double pl_integral(const Populations& n0, double t_us, const Generator& g,
                   const KineticRates& rates);

// Remap branching ratios and depopulation rates onto field-mixed
// eigenstates using overlap weights |<e_i|T_k>|^2. Branching still
// sums to 1; rates stay within [min k, max k].
KineticRates project_rates(const spin::Eigensystem& es, const KineticRates& zero_field);

// Steady-state cw-ODMR contrast (PL_on - PL_off)/PL_off for incoherent
// mixing of one labelled pair at rate w, at arbitrary field/orientation.
double cw_odmr_contrast(const spin::ZfsParameters& zfs, const KineticRates& rates,
                        spin::Pair pair, double mixing_rate,
                        const spin::Vector3& b_lab_mt = spin::Vector3::Zero(),
                        const spin::Orientation& site = spin::Orientation::identity());

}  // namespace odmr::kinetics
