#include <doctest.h>

#include <random>

#include "odmr/constants.hpp"
#include "odmr/spin.hpp"

using namespace odmr;
using namespace odmr::spin;

namespace {
constexpr double kD = 1396.0, kE = -53.0;
}

TEST_CASE("spin-1 operators satisfy su(2) algebra") {
  const SpinOperators& ops = spin1_operators();
  Matrix3c comm = ops.sx * ops.sy - ops.sy * ops.sx;
  CHECK((comm - std::complex<double>(0, 1) * ops.sz).norm() < 1e-14);
  Matrix3c casimir = ops.sx * ops.sx + ops.sy * ops.sy + ops.sz * ops.sz;
  CHECK((casimir - 2.0 * Matrix3c::Identity()).norm() < 1e-14);
  for (const Matrix3c* m : {&ops.sx, &ops.sy, &ops.sz}) {
    CHECK((*m - m->adjoint()).norm() < 1e-14);
    CHECK(std::abs(m->trace()) < 1e-14);
    Eigen::SelfAdjointEigenSolver<Matrix3c> es(*m);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(es.eigenvalues()(2) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("zero-field eigenstates diagonalise the fine-structure term") {
  ZfsParameters zfs{kD, kE};
  Matrix3c h = zfs_hamiltonian(zfs);
  Matrix3c states = zero_field_states();
  // orthonormal
  CHECK((states.adjoint() * states - Matrix3c::Identity()).norm() < 1e-14);
  // energies in the conventional order x, y, z
  const double ex = kD / 3.0 - kE, ey = kD / 3.0 + kE, ez = -2.0 * kD / 3.0;
  Eigen::Vector3d want(ex, ey, ez);
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3cd v = states.col(k);
    CHECK((h * v - want(k) * v).norm() < 1e-10);
  }
  CHECK(ex == doctest::Approx(518.0 + 1.0 / 3.0).epsilon(1e-12));
  CHECK(ey == doctest::Approx(412.0 + 1.0 / 3.0).epsilon(1e-12));
  CHECK(ez == doctest::Approx(-930.0 - 2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("zero-field transitions land on the fine-structure combinations") {
  ZfsParameters zfs{kD, kE};
  auto es = site_eigensystem(zfs, Orientation::identity(), Vector3::Zero());
  CHECK_FALSE(es.ambiguous_labels);
  auto f = transition_frequencies(es);
  CHECK(f.xy_mhz == doctest::Approx(2.0 * std::abs(kE)).epsilon(1e-12));
  CHECK(f.yz_mhz == doctest::Approx(kD + kE).epsilon(1e-12));
  CHECK(f.xz_mhz == doctest::Approx(kD - kE).epsilon(1e-12));
  CHECK(f.xy_mhz == doctest::Approx(106.0).epsilon(1e-12));
  CHECK(f.yz_mhz == doctest::Approx(1343.0).epsilon(1e-12));
  CHECK(f.xz_mhz == doctest::Approx(1449.0).epsilon(1e-12));
}

TEST_CASE("random fine-structure parameters give the analytic spectrum") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ud(200.0, 3000.0), ue(0.05, 0.33);
  std::bernoulli_distribution sign(0.5);
  for (int i = 0; i < 1000; ++i) {
    double d = ud(rng);
    double e = ue(rng) * d * (sign(rng) ? 1.0 : -1.0);
    auto es = site_eigensystem(ZfsParameters{d, e}, Orientation::identity(), Vector3::Zero());
    REQUIRE_FALSE(es.ambiguous_labels);
    CHECK(es.energy_of(Sublevel::x) == doctest::Approx(d / 3.0 - e).epsilon(1e-10));
    CHECK(es.energy_of(Sublevel::y) == doctest::Approx(d / 3.0 + e).epsilon(1e-10));
    CHECK(es.energy_of(Sublevel::z) == doctest::Approx(-2.0 * d / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("gyromagnetic ratio and linear Zeeman splitting") {
  // g_e mu_B / h for g = 2 in MHz per mT
  CHECK(constants::gyromagnetic_mhz_per_mt == doctest::Approx(27.9926).epsilon(2e-5));
  // field along the molecular z axis: the m = +-1 block splits as
  // D/3 +- sqrt((gamma B)^2 + E^2), the m = 0 level stays at -2D/3
  ZfsParameters zfs{kD, kE};
  for (double b : {10.0, 100.0, 1000.0, 10000.0}) {
    auto es = site_eigensystem(zfs, Orientation::identity(), Vector3(0, 0, b));
    double gb = constants::gyromagnetic_mhz_per_mt * b;
    double w = std::sqrt(gb * gb + kE * kE);
    Eigen::Vector3d want(-2.0 * kD / 3.0, kD / 3.0 - w, kD / 3.0 + w);
    std::sort(want.data(), want.data() + 3);
    for (int k = 0; k < 3; ++k)
      CHECK(es.energies_mhz(k) == doctest::Approx(want(k)).epsilon(1e-10));
  }
}

TEST_CASE("Zeeman splitting example value at 100 mT") {
  double gb = constants::gyromagnetic_mhz_per_mt * 100.0;
  CHECK(std::abs(gb - 2799.2) < 0.2);
}

TEST_CASE("field along the molecular x axis mixes only Ty and Tz") {
  ZfsParameters zfs{kD, kE};
  for (double b : {5.0, 50.0, 500.0}) {
    auto es = site_eigensystem(zfs, Orientation::identity(), Vector3(b, 0, 0));
    double gb = constants::gyromagnetic_mhz_per_mt * b;
    // Tx energy is unshifted; the Ty/Tz block splits symmetrically
    double mid = (kD / 3.0 + kE - 2.0 * kD / 3.0) / 2.0;
    double w = std::sqrt(std::pow((kD + kE) / 2.0, 2) + gb * gb);
    Eigen::Vector3d want(kD / 3.0 - kE, mid + w, mid - w);
    std::sort(want.data(), want.data() + 3);
    for (int k = 0; k < 3; ++k)
      CHECK(es.energies_mhz(k) == doctest::Approx(want(k)).epsilon(1e-10));
  }
}

TEST_CASE("site orientation is equivalent to rotating the field") {
  ZfsParameters zfs{kD, kE};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-3.0, 3.0), fld(-50.0, 50.0);
  for (int i = 0; i < 50; ++i) {
    Orientation site{ang(rng), ang(rng) / 2.0, ang(rng)};
    Vector3 b(fld(rng), fld(rng), fld(rng));
    auto a = site_eigensystem(zfs, site, b);
    auto c = site_eigensystem(zfs, Orientation::identity(), site.lab_to_molecular() * b);
    for (int k = 0; k < 3; ++k)
      CHECK(a.energies_mhz(k) == doctest::Approx(c.energies_mhz(k)).epsilon(1e-10));
  }
}

TEST_CASE("hamiltonians are hermitian and traceless") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2000.0, 2000.0);
  for (int i = 0; i < 100; ++i) {
    Matrix3c h = zfs_hamiltonian(ZfsParameters{u(rng), u(rng) / 5.0}) +
                 zeeman_hamiltonian(Vector3(u(rng), u(rng), u(rng)) / 20.0);
    CHECK((h - h.adjoint()).norm() < 1e-9);
    CHECK(std::abs(h.trace()) < 1e-9);
  }
}

TEST_CASE("pair names round-trip") {
  for (Pair p : {Pair::xy, Pair::yz, Pair::xz}) CHECK(pair_from_name(pair_name(p)) == p);
  CHECK_THROWS_AS(pair_from_name("zz"), std::invalid_argument);
  auto lv = pair_levels(Pair::xz);
  CHECK(lv[0] == Sublevel::x);
  CHECK(lv[1] == Sublevel::z);
}
