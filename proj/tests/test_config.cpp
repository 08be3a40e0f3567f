#include <doctest.h>

#include <stdexcept>
#include <string>

#include "odmr/config.hpp"

using namespace odmr;
using config::load_file;
using config::load_text;

#ifndef ODMR_TEST_PROFILE_DIR
#define ODMR_TEST_PROFILE_DIR "../profiles"
#endif

namespace {

std::string thrown_message(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& ex) {
    return ex.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults describe a consistent sample") {
  SimParams p;
  CHECK(p.validate().empty());
  CHECK(p.zfs.d_mhz == 1396.0);
  CHECK(p.zfs.e_mhz == -53.0);
  CHECK(p.rates.depop_rates(0) == doctest::Approx(1.0 / 35.0));
  CHECK(p.rates.depop_rates(2) == doctest::Approx(1.0 / 250.0));
  CHECK(p.decoherence.sigma_inh_mhz == 0.0);
}

TEST_CASE("shipped profiles load without warnings") {
  for (const char* name : {"/crystal.cfg", "/film.cfg"}) {
    auto loaded = load_file(std::string(ODMR_TEST_PROFILE_DIR) + name);
    CHECK(loaded.warnings.empty());
    CHECK(loaded.params.decoherence.sigma_inh_mhz > 0.0);
  }
  auto film = load_file(std::string(ODMR_TEST_PROFILE_DIR) + "/film.cfg");
  CHECK(film.params.decoherence.t2_us[0] == doctest::Approx(0.75));
  CHECK(t2star_us_from_sigma(film.params.decoherence.sigma_inh_mhz) ==
        doctest::Approx(0.12).epsilon(1e-9));
}

TEST_CASE("values land in the parameter set") {
  auto loaded = load_text(
      "[zfs]\nd = 1400\ne = -50\n"
      "[kinetics]\nlifetimes = 30 100 200\nbranching = 0.5 0.3 0.2\n"
      "[pump]\ncw_rate = 1e-3\n"
      "[coherence]\nt2_star = 0.39\n"
      "[readout]\ndelay = 40\nwindow = 8\n");
  const SimParams& p = loaded.params;
  CHECK(p.zfs.d_mhz == 1400.0);
  CHECK(p.rates.depop_rates(1) == doctest::Approx(0.01));
  CHECK(p.rates.branching(0) == doctest::Approx(0.5));
  CHECK(p.cw_pump_rate == doctest::Approx(1e-3));
  CHECK(p.readout_delay_us == 40.0);
  // t2_star is stored as the equivalent inhomogeneous spread
  CHECK(p.decoherence.sigma_inh_mhz == doctest::Approx(sigma_mhz_from_t2star(0.39)));
  // untouched keys keep their defaults
  CHECK(p.cw_linewidth_mhz == 20.0);
}

TEST_CASE("unknown and malformed input is rejected with positions") {
  auto msg = thrown_message([] { load_text("[zfs]\nd = 1396\nbogus = 1\n", "conf"); });
  CHECK(msg.find("conf:3") != std::string::npos);
  CHECK(msg.find("unknown key") != std::string::npos);

  msg = thrown_message([] { load_text("[zfs\nd = 1\n", "conf"); });
  CHECK(msg.find("conf:1") != std::string::npos);
  CHECK(msg.find("unterminated") != std::string::npos);

  msg = thrown_message([] { load_text("[zfs]\nd = 1\nd = 2\n", "conf"); });
  CHECK(msg.find("duplicate key") != std::string::npos);

  msg = thrown_message([] { load_text("d = 1\n", "conf"); });
  CHECK(msg.find("outside any [section]") != std::string::npos);

  msg = thrown_message([] { load_text("[zfs]\nd = fast\n", "conf"); });
  CHECK(msg.find("not numeric") != std::string::npos);

  msg = thrown_message([] { load_text("[zfs]\nd 1396\n", "conf"); });
  CHECK(msg.find("key = value") != std::string::npos);

  msg = thrown_message([] { load_text("[kinetics]\nlifetimes = 35 120\n", "conf"); });
  CHECK(msg.find("expects 3 value(s)") != std::string::npos);

  msg = thrown_message([] { load_text("[ensemble]\nquadrature_order = 2.5\n", "conf"); });
  CHECK(msg.find("must be an integer") != std::string::npos);

  CHECK_THROWS_AS(load_file("/nonexistent/path.cfg"), std::runtime_error);
}

TEST_CASE("coherence spread accepts exactly one spelling") {
  auto msg = thrown_message(
      [] { load_text("[coherence]\nsigma_inh = 0.6\nt2_star = 0.39\n", "conf"); });
  CHECK(msg.find("either coherence.sigma_inh or coherence.t2_star") != std::string::npos);
  CHECK(load_text("[coherence]\nsigma_inh = 0.6\n").params.decoherence.sigma_inh_mhz == 0.6);
}

TEST_CASE("coherence times respect the population-decay bound") {
  // defaults: bound for xz is 2/(1/35 + 1/250) ~ 61.4 us
  auto msg = thrown_message([] { load_text("[coherence]\nt2_xz = 100\n"); });
  CHECK(msg.find("exceeds the population-decay bound") != std::string::npos);

  SimParams p;
  p.decoherence.t2_us[2] = 100.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.decoherence.t2_us[2] = 61.0;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("unconventional asymmetry is a warning, not an error") {
  auto loaded = load_text("[zfs]\nd = 1396\ne = -500\n");
  REQUIRE(loaded.warnings.size() == 1);
  CHECK(loaded.warnings[0].find("|e| exceeds |d|/3") != std::string::npos);
}

TEST_CASE("key-value view round-trips every parameter") {
  auto loaded = load_text(
      "[zfs]\nd = 1390\ne = -55\n"
      "[kinetics]\nlifetimes = 30 100 200\n"
      "[coherence]\nt2_xy = 1\nt2_yz = 1.5\nt2_xz = 1\nsigma_inh = 1.2\n"
      "[field]\nb_lab = 0.5 0 2\nsite_b_angle = 45\n"
      "[cw]\nmixing_rate = 2\n");
  auto kv = config::to_key_values(loaded.params);
  SimParams back = config::from_key_values(kv);
  CHECK(config::to_key_values(back) == kv);
  CHECK(back.zfs.e_mhz == -55.0);
  CHECK(back.decoherence.t2_us[1] == 1.5);
  CHECK(back.b_lab_mt(2) == 2.0);
  CHECK(back.site_b_angle_deg == 45.0);
  CHECK(back.cw_mixing_rate == 2.0);

  // the flat view rejects garbage too
  kv["zfs.d"] = {0.0};
  kv["zfs.e"] = {0.0};
  CHECK_THROWS_AS(config::from_key_values(kv), std::invalid_argument);
}
