#pragma once

// Physical constants, CODATA 2018 rounded to 6 significant figures.
// Unit conventions used throughout: energies as frequencies in MHz,
// time in us for kinetics and in ns for microwave pulses, magnetic
// field in mT, lengths in um.

namespace odmr::constants {

inline constexpr double planck_j_s = 6.62607e-34;
inline constexpr double hbar_j_s = 1.05457e-34;
inline constexpr double bohr_magneton_j_per_t = 9.27401e-24;
inline constexpr double g_electron = 2.0;
inline constexpr double euler_e = 2.71828;

// g_e * mu_B / h, expressed in MHz per mT (= GHz per T / 1000 * 1000).
inline constexpr double gyromagnetic_mhz_per_mt =
    g_electron * bohr_magneton_j_per_t / planck_j_s * 1e-9;

// nT * um^{3/2} per T * m^{3/2}
inline constexpr double t_m32_to_nt_um32 = 1e18;

}  // namespace odmr::constants
