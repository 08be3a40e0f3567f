#include <doctest.h>

#include <random>

#include "odmr/kinetics.hpp"

using namespace odmr;
using namespace odmr::kinetics;

namespace {

// independent propagation oracle: classic RK4 with Richardson
// extrapolation, no matrix exponential involved
Populations rk4_step(const Populations& n, double h, const Generator& g) {
  Populations k1 = g * n;
  Populations k2 = g * (n + 0.5 * h * k1);
  Populations k3 = g * (n + 0.5 * h * k2);
  Populations k4 = g * (n + h * k3);
  return n + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Populations rk4_evolve(Populations n, double t, const Generator& g, int steps) {
  double h = t / steps;
  for (int i = 0; i < steps; ++i) n = rk4_step(n, h, g);
  return n;
}

// Richardson extrapolation of the O(h^4) method: (16 f(h/2) - f(h)) / 15
Populations rk4_richardson(const Populations& n, double t, const Generator& g, int steps) {
  Populations coarse = rk4_evolve(n, t, g, steps);
  Populations fine = rk4_evolve(n, t, g, 2 * steps);
  return (16.0 * fine - coarse) / 15.0;
}

Populations ground() {
  Populations n = Populations::Zero();
  n(0) = 1.0;
  return n;
}

}  // namespace

TEST_CASE("rate matrix conserves total population") {
  KineticRates rates;
  rates.pump_rate = 0.05;
  for (auto mix : {std::optional<MicrowaveMixing>{},
                   std::optional<MicrowaveMixing>{{spin::Pair::xz, 3.0}}}) {
    Generator g = rate_matrix(rates, mix);
    for (int j = 0; j < 5; ++j) CHECK(std::abs(g.col(j).sum()) < 1e-14);
    // off-diagonal entries are non-negative flows
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j) CHECK(g(i, j) >= 0.0);
  }
}

TEST_CASE("matrix-exponential evolution matches an RK4 oracle") {
  KineticRates rates;
  rates.pump_rate = 0.046;
  Generator g = rate_matrix(rates, MicrowaveMixing{spin::Pair::xy, 0.8});
  Populations n0;
  n0 << 0.2, 0.1, 0.4, 0.2, 0.1;
  // step size keeps h * s1_decay_rate ~ 0.05, well inside RK4 stability
  for (double t : {0.1, 1.0, 10.0}) {
    Populations a = evolve(n0, t, g);
    Populations b = rk4_richardson(n0, t, g, std::max(64, int(t * 2000)));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(a.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.minCoeff() >= -1e-12);
  }
  // long times via the semigroup property on the verified short step
  Populations direct = evolve(n0, 1000.0, g);
  Populations stepped = n0;
  for (int i = 0; i < 100; ++i) stepped = evolve(stepped, 10.0, g);
  CHECK((direct - stepped).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("steady state agrees with long-time evolution") {
  KineticRates rates;
  rates.pump_rate = 6.6e-4;
  for (auto mix : {std::optional<MicrowaveMixing>{},
                   std::optional<MicrowaveMixing>{{spin::Pair::yz, 1.0}}}) {
    Generator g = rate_matrix(rates, mix);
    Populations ss = steady_state(g);
    Populations lt = evolve(ground(), 1e5, g);
    CHECK((ss - lt).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(ss.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((g * ss).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("steady state requires pumping to leave the ground state") {
  KineticRates rates;  // pump_rate = 0
  Generator g = rate_matrix(rates);
  Populations ss = steady_state(g);
  CHECK(ss(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("strong mixing equalises the two driven sublevels") {
  KineticRates rates;
  rates.pump_rate = 0.01;
  Generator g = rate_matrix(rates, MicrowaveMixing{spin::Pair::xz, 1e6});
  Populations ss = steady_state(g);
  CHECK(ss(2) == doctest::Approx(ss(4)).epsilon(1e-4));  // Tx == Tz
}

TEST_CASE("photoluminescence rate tracks the singlet population") {
  KineticRates rates;
  rates.pump_rate = 0.5;
  Populations n;
  n << 0.3, 0.25, 0.2, 0.15, 0.1;
  CHECK(pl_rate(n, rates) ==
        doctest::Approx((1.0 - rates.isc_yield) * rates.s1_decay_rate * 0.25).epsilon(1e-12));
}

TEST_CASE("PL integral matches numerical quadrature of the PL rate") {
  KineticRates rates;
  rates.pump_rate = 0.046;
  Generator g = rate_matrix(rates);
  Populations n0;
  n0 << 0.1, 0.0, 0.5, 0.25, 0.15;
  double t = 10.0;
  // Simpson's rule on a fine grid using the (already verified) evolve
  int m = 2000;
  double h = t / m, acc = 0.0;
  for (int i = 0; i <= m; ++i) {
    double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * pl_rate(evolve(n0, i * h, g), rates);
  }
  acc *= h / 3.0;
  CHECK(pl_integral(n0, t, g, rates) == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("readout window distinguishes fast and slow sublevels") {
  // population parked in Tx (fast, 35 us) largely returns to S0 during
  // the dark delay and fluoresces once the pump restarts; population
  // parked in Tz (slow, 250 us) is still shelved and stays dark
  KineticRates dark;  // no pump
  Generator g_dark = rate_matrix(dark);
  auto read_after_delay = [&](int level) {
    Populations n = Populations::Zero();
    n(level) = 1.0;
    n = evolve(n, 50.0, g_dark);
    KineticRates pumped;
    pumped.pump_rate = 0.046;
    return pl_integral(n, 10.0, rate_matrix(pumped), pumped);
  };
  CHECK(read_after_delay(2) > read_after_delay(4));
}

TEST_CASE("cw contrast signs follow the population-lifetime products") {
  KineticRates rates;
  rates.pump_rate = 6.6e-4;
  double c_xy = cw_odmr_contrast({1396.0, -53.0}, rates, spin::Pair::xy, 1.0);
  double c_yz = cw_odmr_contrast({1396.0, -53.0}, rates, spin::Pair::yz, 1.0);
  double c_xz = cw_odmr_contrast({1396.0, -53.0}, rates, spin::Pair::xz, 1.0);
  CHECK(c_xy < 0.0);
  CHECK(c_yz > 0.0);
  CHECK(c_xz < 0.0);
  // calibrated magnitudes, frozen against an independent solver
  CHECK(c_xz == doctest::Approx(-2.004e-3).epsilon(0.02));
  CHECK(c_xy == doctest::Approx(-1.63e-3).epsilon(0.02));
  CHECK(c_yz == doctest::Approx(1.13e-4).epsilon(0.03));
  CHECK(std::abs(c_yz / c_xz) < 0.1);
}

TEST_CASE("cw contrast sign rule for random kinetics") {
  // mixing pair (a, b) raises PL iff it moves population from the
  // sublevel with larger n_ss ~ p_k tau_k into the faster-returning
  // one; equivalently sign(contrast) = sign(w_a k_a + w_b k_b type
  // expression). Empirically: contrast < 0 iff p_a tau_a > p_b tau_b
  // when k_a > k_b (population piles into the slower level), checked
  // here against the steady-state solver directly.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> up(0.05, 1.0), ut(20.0, 400.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    KineticRates r;
    Eigen::Vector3d p(up(rng), up(rng), up(rng));
    r.branching = p / p.sum();
    r.depop_rates = Eigen::Vector3d(1.0 / ut(rng), 1.0 / ut(rng), 1.0 / ut(rng));
    r.pump_rate = 6.6e-4;
    for (auto pair : {spin::Pair::xy, spin::Pair::yz, spin::Pair::xz}) {
      auto [la, lb] = std::pair{int(spin::pair_levels(pair)[0]), int(spin::pair_levels(pair)[1])};
      double prod_a = r.branching(la) / r.depop_rates(la);
      double prod_b = r.branching(lb) / r.depop_rates(lb);
      double ka = r.depop_rates(la), kb = r.depop_rates(lb);
      // skip near-degenerate cases where the sign is numerically frail
      if (std::abs(prod_a - prod_b) < 0.05 * (prod_a + prod_b)) continue;
      if (std::abs(ka - kb) < 0.05 * (ka + kb)) continue;
      double c = cw_odmr_contrast({1396.0, -53.0}, r, pair, 1.0);
      // mixing moves population from the overpopulated level to the
      // other; PL rises iff the receiving level returns faster
      bool a_over = prod_a > prod_b;
      bool receiver_faster = a_over ? (kb > ka) : (ka > kb);
      CHECK(std::signbit(c) != receiver_faster);
      ++checked;
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("branching projection preserves normalisation at zero field") {
  KineticRates rates;
  auto es = spin::site_eigensystem({1396.0, -53.0}, spin::Orientation::identity(),
                                   spin::Vector3::Zero());
  KineticRates proj = project_rates(es, rates);
  CHECK(proj.branching.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // zero field: projection is the identity up to label order
  CHECK((proj.branching - rates.branching).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((proj.depop_rates - rates.depop_rates).cwiseAbs().maxCoeff() < 1e-10);

  // at strong field the rates stay within the zero-field range
  auto es2 = spin::site_eigensystem({1396.0, -53.0}, spin::Orientation::identity(),
                                    spin::Vector3(40.0, 25.0, 60.0));
  KineticRates p2 = project_rates(es2, rates);
  CHECK(p2.branching.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p2.depop_rates.minCoeff() >= rates.depop_rates.minCoeff() - 1e-12);
  CHECK(p2.depop_rates.maxCoeff() <= rates.depop_rates.maxCoeff() + 1e-12);
}

TEST_CASE("rate validation rejects nonphysical settings") {
  KineticRates r;
  r.isc_yield = 1.4;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r = KineticRates{};
  r.branching = Eigen::Vector3d(0.5, 0.4, 0.3);  // sums to 1.2
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r = KineticRates{};
  r.depop_rates(1) = -0.1;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  KineticRates ok;
  CHECK_NOTHROW(ok.validate());
}
