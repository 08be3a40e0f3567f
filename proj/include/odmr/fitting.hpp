#pragma once

#include <cstdint>
#include <span>

// Least-squares model fits for simulated traces. Time units are
// whatever the caller supplies; fitted rates/frequencies come back in
// the reciprocal unit.

namespace odmr::fitting {

struct CosineFitOptions {
  // exp(-(t/T)^2) envelope instead of exp(-t/T); an additional fixed
  // exponential exp(-fixed_rate * t) can be factored out, e.g. a known
  // homogeneous decay under an inhomogeneous envelope.
  bool gaussian_envelope = false;
  double fixed_rate = 0.0;
  // let the envelope centre float: env(t - t0). Absorbs the apparent
  // shift of the free-evolution origin caused by finite pulse length.
  bool fit_time_origin = false;
  int max_iterations = 200;
  int restarts = 5;
  std::uint64_t seed = 1;
};

struct DampedCosineResult {
  double amplitude = 0.0;
  double decay_time = 0.0;
  double frequency = 0.0;  // cycles per time unit
  double phase_rad = 0.0;
  double offset = 0.0;
  double decay_time_sigma = 0.0;
  double frequency_sigma = 0.0;
  double time_origin = 0.0;  // nonzero only with fit_time_origin
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// y ~ a * env(t) * cos(2 pi f t + phase) + c
DampedCosineResult fit_damped_cosine(std::span<const double> t, std::span<const double> y,
                                     const CosineFitOptions& opt = {});

struct ExponentialFitOptions {
  int max_iterations = 200;
  int restarts = 5;
  std::uint64_t seed = 1;
};

struct ExponentialResult {
  double amplitude = 0.0;
  double decay_time = 0.0;
  double offset = 0.0;
  double decay_time_sigma = 0.0;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// y ~ a * exp(-t / T) + c
ExponentialResult fit_exponential(std::span<const double> t, std::span<const double> y,
                                  const ExponentialFitOptions& opt = {});

}  // namespace odmr::fitting
