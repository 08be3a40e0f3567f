#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "odmr/fitting.hpp"

using namespace odmr::fitting;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[size_t(i)] = a + (b - a) * i / double(n - 1);
  return v;
}

struct Truth {
  double a = 0.4, T = 1.3, f = 5.0, phase = 0.3, c = 0.1, t0 = 0.0;
};

std::vector<double> synth(const std::vector<double>& t, const Truth& p, bool gaussian,
                          double fixed_rate = 0.0) {
  std::vector<double> y(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    double te = t[i] - p.t0;
    double env = gaussian ? std::exp(-(te / p.T) * (te / p.T)) : std::exp(-te / p.T);
    if (fixed_rate != 0.0) env *= std::exp(-fixed_rate * t[i]);
    y[i] = p.a * env * std::cos(kTwoPi * p.f * t[i] + p.phase) + p.c;
  }
  return y;
}

}  // namespace

TEST_CASE("damped cosine parameters are recovered exactly from clean data") {
  Truth p;
  auto t = linspace(0.0, 3.0, 181);
  auto y = synth(t, p, false);
  DampedCosineResult r = fit_damped_cosine(t, y);
  REQUIRE(r.converged);
  CHECK(r.amplitude == doctest::Approx(p.a).epsilon(1e-7));
  CHECK(r.decay_time == doctest::Approx(p.T).epsilon(1e-7));
  CHECK(r.frequency == doctest::Approx(p.f).epsilon(1e-8));
  CHECK(r.phase_rad == doctest::Approx(p.phase).epsilon(1e-6));
  CHECK(r.offset == doctest::Approx(p.c).epsilon(1e-7));
  CHECK(r.rms_residual < 1e-9);
  CHECK(r.time_origin == 0.0);
}

TEST_CASE("gaussian envelope and factored exponential are separated") {
  Truth p;
  p.T = 0.39;
  p.f = 5.0;
  auto t = linspace(0.0, 1.5, 151);
  double fixed = 1.0 / 1.17;  // known homogeneous decay divided out
  auto y = synth(t, p, true, fixed);
  CosineFitOptions opt;
  opt.gaussian_envelope = true;
  opt.fixed_rate = fixed;
  DampedCosineResult r = fit_damped_cosine(t, y, opt);
  REQUIRE(r.converged);
  CHECK(r.decay_time == doctest::Approx(0.39).epsilon(1e-6));
  CHECK(r.frequency == doctest::Approx(5.0).epsilon(1e-7));

  // without the factored rate the apparent decay comes out shorter
  CosineFitOptions naive;
  naive.gaussian_envelope = true;
  DampedCosineResult rn = fit_damped_cosine(t, y, naive);
  REQUIRE(rn.converged);
  CHECK(rn.decay_time < 0.39);
}

TEST_CASE("floating time origin recovers a shifted envelope centre") {
  Truth p;
  p.T = 0.12;
  p.f = 5.0;
  p.t0 = 0.016;  // apparent origin shift from finite pulses
  auto t = linspace(0.0, 0.5, 126);
  auto y = synth(t, p, true);

  CosineFitOptions fixed;
  fixed.gaussian_envelope = true;
  DampedCosineResult biased = fit_damped_cosine(t, y, fixed);
  REQUIRE(biased.converged);
  CHECK(std::abs(biased.decay_time - p.T) / p.T > 0.02);  // this is why t0 exists

  CosineFitOptions free_origin = fixed;
  free_origin.fit_time_origin = true;
  DampedCosineResult r = fit_damped_cosine(t, y, free_origin);
  REQUIRE(r.converged);
  CHECK(r.decay_time == doctest::Approx(p.T).epsilon(5e-3));
  CHECK(r.time_origin == doctest::Approx(p.t0).epsilon(5e-2));
  CHECK(r.frequency == doctest::Approx(p.f).epsilon(1e-6));
}

TEST_CASE("noisy traces still yield calibrated estimates") {
  Truth p;
  p.a = 0.05;
  p.T = 1.0;
  p.f = 6.8;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.1 * p.a);
  auto t = linspace(0.0, 2.0, 201);
  auto y = synth(t, p, false);
  for (auto& v : y) v += noise(rng);
  DampedCosineResult r = fit_damped_cosine(t, y);
  REQUIRE(r.converged);
  CHECK(r.frequency == doctest::Approx(p.f).epsilon(5e-3));
  CHECK(r.decay_time == doctest::Approx(p.T).epsilon(0.15));
  CHECK(r.frequency_sigma > 0.0);
  CHECK(r.decay_time_sigma > 0.0);
  CHECK(std::abs(r.frequency - p.f) < 5.0 * r.frequency_sigma);
  CHECK(std::abs(r.decay_time - p.T) < 5.0 * r.decay_time_sigma);
}

TEST_CASE("initial frequency search stays below the sampling limit") {
  // on a uniform grid a 95 cycle/us tone is indistinguishable from 5;
  // the fit must report the sub-Nyquist representative
  auto t = linspace(0.0, 1.0, 101);
  std::vector<double> y(t.size());
  for (size_t i = 0; i < t.size(); ++i)
    y[i] = 0.3 * std::exp(-t[i] / 2.0) * std::cos(kTwoPi * 95.0 * t[i]) + 0.5;
  DampedCosineResult r = fit_damped_cosine(t, y);
  REQUIRE(r.converged);
  CHECK(r.frequency == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("exponential fit recovers growth toward an offset") {
  auto t = linspace(0.0, 5.0, 120);
  std::vector<double> y(t.size());
  for (size_t i = 0; i < t.size(); ++i) y[i] = -0.8 * std::exp(-t[i] / 1.7) + 1.0;
  ExponentialResult r = fit_exponential(t, y);
  REQUIRE(r.converged);
  CHECK(r.amplitude == doctest::Approx(-0.8).epsilon(1e-7));
  CHECK(r.decay_time == doctest::Approx(1.7).epsilon(1e-7));
  CHECK(r.offset == doctest::Approx(1.0).epsilon(1e-7));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (auto& v : y) v += noise(rng);
  ExponentialResult rn = fit_exponential(t, y);
  REQUIRE(rn.converged);
  CHECK(rn.decay_time == doctest::Approx(1.7).epsilon(0.05));
  CHECK(std::abs(rn.decay_time - 1.7) < 5.0 * rn.decay_time_sigma);
}

TEST_CASE("bad inputs are rejected") {
  std::vector<double> t{0, 1, 2, 3, 4}, y{1, 2, 3};
  CHECK_THROWS_AS(fit_damped_cosine(t, y), std::invalid_argument);
  CHECK_THROWS_AS(fit_damped_cosine(std::vector<double>{0, 1, 2},
                                    std::vector<double>{1, 2, 3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_exponential(std::vector<double>{0, 1}, std::vector<double>{1, 2}),
                  std::invalid_argument);
}
