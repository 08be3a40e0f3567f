#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "odmr/fitting.hpp"
#include "odmr/params.hpp"
#include "odmr/seqlang.hpp"

// Experiment presets and the executor that turns a pulse sequence into
// photoluminescence. Every pulsed data point is a differential
// contrast: the sequence PL against a microwave-free reference,
// ensemble-averaged over the inhomogeneous strain distribution.

namespace odmr::experiments {

struct AxisSpec {
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  int points = 0;  // 0 = preset default
  bool given() const { return points > 0 || !std::isnan(min) || !std::isnan(max); }
};

struct ExperimentSpec {
  std::string preset;
  spin::Pair pair = spin::Pair::xz;
  double rabi_mhz = 5.0;
  double ramsey_detuning_mhz = 5.0;  // programmed offset of the Ramsey tone
  AxisSpec x, x2;
  double noise = 0.0;  // Gaussian noise amplitude relative to the trace peak
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct Trace {
  std::vector<double> x, x2, y;  // x2 parallel to x for 2D scans (row-major, x outer)
  std::string x_name, x2_name, y_name;
  std::string preset;
  std::uint64_t seed = 0;
  bool two_d() const { return !x2.empty(); }
};

struct FitSummary {
  std::string model;
  std::vector<std::pair<std::string, double>> values;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct PresetResult {
  Trace trace;
  std::optional<FitSummary> fit;
  std::vector<std::string> warnings;
};

// Known presets: cw-odmr, field-map, rabi, chevron, power, ramsey,
// hahn, pulsed-odmr, multilevel-rabi, multilevel-hahn.
const std::vector<std::string>& preset_names();
PresetResult run_preset(const SimParams& params, const ExperimentSpec& spec);

// Differential contrast; throws on a zero reference.
double differential_signal(double pl_sequence, double pl_reference);

struct ExecOptions {
  double strain_mhz = 0.0;   // one inhomogeneous-ensemble sample
  bool suppress_mw = false;  // reference run: pulses skipped
};

// PL of one concrete (sweep-free) sequence.
double execute_sequence(const seq::SequenceAst& ast, const SimParams& params,
                        const ExecOptions& opt = {},
                        std::vector<std::string>* warnings = nullptr);

// Ensemble-averaged contrast of one concrete sequence.
double sequence_contrast(const seq::SequenceAst& ast, const SimParams& params,
                         std::vector<std::string>* warnings = nullptr);

// Expand sweeps and compute the contrast per grid point; axis columns
// come from the sweep declarations. jobs > 1 splits points over
// threads with identical results.
Trace run_sequence_scan(const seq::SequenceAst& ast, const SimParams& params, int jobs = 1,
                        std::vector<std::string>* warnings = nullptr);

// Gaussian noise, amplitude relative to max |y|, one generator per
// point (reproducible independently of threading).
void add_noise(Trace& t, double level, std::uint64_t seed);

// Checked fits used by the presets, exposed for direct use.
fitting::DampedCosineResult fit_trace_damped_cosine(const Trace& t,
                                                    const fitting::CosineFitOptions& opt = {});
fitting::ExponentialResult fit_trace_exponential(const Trace& t);

}  // namespace odmr::experiments
