#include "odmr/spin.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "odmr/constants.hpp"

namespace odmr::spin {

namespace {
constexpr std::complex<double> I{0.0, 1.0};
const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
}  // namespace

const SpinOperators& spin1_operators() {
  static const SpinOperators ops = [] {
    SpinOperators o;
    o.sx << 0, inv_sqrt2, 0, inv_sqrt2, 0, inv_sqrt2, 0, inv_sqrt2, 0;
    o.sy << 0, -I * inv_sqrt2, 0, I * inv_sqrt2, 0, -I * inv_sqrt2, 0, I * inv_sqrt2, 0;
    o.sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
    return o;
  }();
  return ops;
}

Matrix3c zfs_hamiltonian(const ZfsParameters& zfs) {
  const auto& op = spin1_operators();
  Matrix3c sz2 = op.sz * op.sz;
  Matrix3c sx2 = op.sx * op.sx;
  Matrix3c sy2 = op.sy * op.sy;
  return zfs.d_mhz * (sz2 - (2.0 / 3.0) * Matrix3c::Identity()) + zfs.e_mhz * (sx2 - sy2);
}

Matrix3c zeeman_hamiltonian(const Vector3& b_mol_mt) {
  const auto& op = spin1_operators();
  const double g = constants::gyromagnetic_mhz_per_mt;
  return g * (b_mol_mt.x() * op.sx + b_mol_mt.y() * op.sy + b_mol_mt.z() * op.sz);
}

Eigen::Matrix3d Orientation::lab_to_molecular() const {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  Eigen::Matrix3d mol_to_lab = (AngleAxisd(alpha, Vector3d::UnitZ()) *
                                AngleAxisd(beta, Vector3d::UnitY()) *
                                AngleAxisd(gamma, Vector3d::UnitZ()))
                                   .toRotationMatrix();
  return mol_to_lab.transpose();
}

Vector3 rotate_to_molecular_frame(const Orientation& site, const Vector3& b_lab_mt) {
  return site.lab_to_molecular() * b_lab_mt;
}

const Matrix3c& zero_field_states() {
  static const Matrix3c t = [] {
    Matrix3c m;
    // columns Tx, Ty, Tz in the |+1>, |0>, |-1> basis
    m.col(0) << -inv_sqrt2, 0.0, inv_sqrt2;
    m.col(1) << I * inv_sqrt2, 0.0, I * inv_sqrt2;
    m.col(2) << 0.0, 1.0, 0.0;
    return m;
  }();
  return t;
}

Eigensystem eigensystem(const Matrix3c& h_mhz) {
  Eigen::SelfAdjointEigenSolver<Matrix3c> solver(h_mhz);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spin: eigensolver failed to converge");

  Eigensystem es;
  es.energies_mhz = solver.eigenvalues();
  es.states = solver.eigenvectors();

  // label columns by largest overlap with the zero-field states
  const Matrix3c& t = zero_field_states();
  Eigen::Matrix3d w;  // w(label, col) = |<T_label | v_col>|^2
  for (int l = 0; l < 3; ++l)
    for (int c = 0; c < 3; ++c) w(l, c) = std::norm(t.col(l).dot(es.states.col(c)));

  std::array<bool, 3> col_taken{false, false, false};
  for (int l = 0; l < 3; ++l) {
    int best = -1;
    double best_w = -1.0;
    for (int c = 0; c < 3; ++c) {
      if (!col_taken[c] && w(l, c) > best_w) {
        best_w = w(l, c);
        best = c;
      }
    }
    es.column_of_label[l] = best;
    col_taken[best] = true;
    if (best_w < 0.5) es.ambiguous_labels = true;
  }
  return es;
}

const char* pair_name(Pair p) {
  switch (p) {
    case Pair::xy: return "xy";
    case Pair::yz: return "yz";
    default: return "xz";
  }
}

Pair pair_from_name(const std::string& name) {
  if (name == "xy") return Pair::xy;
  if (name == "yz") return Pair::yz;
  if (name == "xz") return Pair::xz;
  throw std::invalid_argument("unknown sublevel pair '" + name + "' (expected xy, yz or xz)");
}

TransitionFrequencies transition_frequencies(const Eigensystem& es) {
  TransitionFrequencies f;
  f.xy_mhz = std::abs(es.energy_of(Sublevel::x) - es.energy_of(Sublevel::y));
  f.yz_mhz = std::abs(es.energy_of(Sublevel::y) - es.energy_of(Sublevel::z));
  f.xz_mhz = std::abs(es.energy_of(Sublevel::x) - es.energy_of(Sublevel::z));
  return f;
}

Eigensystem site_eigensystem(const ZfsParameters& zfs, const Orientation& site,
                             const Vector3& b_lab_mt) {
  Matrix3c h = zfs_hamiltonian(zfs);
  if (b_lab_mt.squaredNorm() > 0.0)
    h += zeeman_hamiltonian(rotate_to_molecular_frame(site, b_lab_mt));
  return eigensystem(h);
}

}  // namespace odmr::spin
