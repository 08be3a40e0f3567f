#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

// Spin-1 Hamiltonians for a photoexcited triplet with zero-field
// splitting, and the bookkeeping needed to follow the zero-field
// sublevels (Tx, Ty, Tz) through an applied magnetic field.

namespace odmr::spin {

using Matrix3c = Eigen::Matrix3cd;
using Vector3 = Eigen::Vector3d;

// Zero-field splitting parameters in MHz. Convention: |E| <= |D|/3.
struct ZfsParameters {
  double d_mhz = 0.0;
  double e_mhz = 0.0;
  bool conventional() const { return std::abs(e_mhz) <= std::abs(d_mhz) / 3.0 + 1e-12; }
};

struct SpinOperators {
  Matrix3c sx, sy, sz;
};

// Spin-1 operators in the |+1>, |0>, |-1> basis (hbar = 1).
const SpinOperators& spin1_operators();

// H/h in MHz, |m> basis: D (Sz^2 - 2/3) + E (Sx^2 - Sy^2).
Matrix3c zfs_hamiltonian(const ZfsParameters& zfs);

// Zeeman term g_e mu_B B.S / h for a field given in the molecular frame, mT.
Matrix3c zeeman_hamiltonian(const Vector3& b_mol_mt);

// Orientation of a molecule in the lab, intrinsic Z-Y-Z Euler angles (rad).
struct Orientation {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  Eigen::Matrix3d lab_to_molecular() const;
  static Orientation identity() { return {}; }
  static Orientation about_lab_z(double angle_rad) { return {angle_rad, 0.0, 0.0}; }
};

Vector3 rotate_to_molecular_frame(const Orientation& site, const Vector3& b_lab_mt);

// Zero-field eigenstates as columns (Tx, Ty, Tz) in the |m> basis:
//   Tx = (|-1> - |+1>)/sqrt(2), Ty = i(|-1> + |+1>)/sqrt(2), Tz = |0>.
const Matrix3c& zero_field_states();

enum class Sublevel { x = 0, y = 1, z = 2 };

// Eigendecomposition with each eigenvector labelled by the zero-field
// state it overlaps most. At high field the labels lose meaning; the
// degenerate flag is set when the assignment is ambiguous (two
// eigenvectors claim the same label or the best overlap is < 1/2).
struct Eigensystem {
  Eigen::Vector3d energies_mhz;          // ascending
  Matrix3c states;                       // columns, |m> basis
  std::array<int, 3> column_of_label{};  // column index for Tx, Ty, Tz
  bool ambiguous_labels = false;

  double energy_of(Sublevel s) const { return energies_mhz(column_of_label[int(s)]); }
};

Eigensystem eigensystem(const Matrix3c& h_mhz);

// The three sublevel pairs. Canonical level order within a pair is
// (x, y), (y, z), (x, z); for D > 0, E < 0 the first is the upper level.
enum class Pair { xy = 0, yz = 1, xz = 2 };

constexpr std::array<Sublevel, 2> pair_levels(Pair p) {
  switch (p) {
    case Pair::xy: return {Sublevel::x, Sublevel::y};
    case Pair::yz: return {Sublevel::y, Sublevel::z};
    default: return {Sublevel::x, Sublevel::z};
  }
}

const char* pair_name(Pair p);
Pair pair_from_name(const std::string& name);  // throws std::invalid_argument

struct TransitionFrequencies {
  double xy_mhz = 0.0, yz_mhz = 0.0, xz_mhz = 0.0;
  double of(Pair p) const {
    switch (p) {
      case Pair::xy: return xy_mhz;
      case Pair::yz: return yz_mhz;
      default: return xz_mhz;
    }
  }
};

// |E_a - E_b| per pair, labels tracked through the field.
TransitionFrequencies transition_frequencies(const Eigensystem& es);

// Convenience: diagonalise zfs + zeeman for one molecular site.
Eigensystem site_eigensystem(const ZfsParameters& zfs, const Orientation& site,
                             const Vector3& b_lab_mt);

}  // namespace odmr::spin
