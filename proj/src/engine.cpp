#include "odmr/engine.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace odmr::engine {

namespace {

constexpr std::complex<double> I{0.0, 1.0};
constexpr double two_pi = 2.0 * std::numbers::pi;

// 2x2 rotating-frame unitary embedded on the pair's levels.
Eigen::Matrix3cd pair_unitary(spin::Pair pair, double rabi_mhz, double t_us, double phase_rad,
                              double detuning_mhz) {
  auto [la, lb] = spin::pair_levels(pair);
  int a = int(la), b = int(lb);

  const double wr = std::hypot(rabi_mhz, detuning_mhz);  // generalised Rabi frequency
  Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();
  if (wr == 0.0 || t_us == 0.0) return u;

  // U = cos(theta) I - i sin(theta) (n . sigma), theta = pi wr t
  const double theta = std::numbers::pi * wr * t_us;
  const double c = std::cos(theta), s = std::sin(theta);
  const double nx = rabi_mhz * std::cos(phase_rad) / wr;
  const double ny = rabi_mhz * std::sin(phase_rad) / wr;
  const double nz = detuning_mhz / wr;

  u(a, a) = c - I * s * nz;
  u(b, b) = c + I * s * nz;
  u(a, b) = -I * s * (nx - I * ny);
  u(b, a) = -I * s * (nx + I * ny);
  return u;
}

}  // namespace

kinetics::Populations HybridState::populations() const {
  kinetics::Populations n;
  n << n_s0, n_s1, rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real();
  return n;
}

void HybridState::set_populations(const kinetics::Populations& n) {
  n_s0 = n(0);
  n_s1 = n(1);
  for (int i = 0; i < 3; ++i) rho(i, i) = n(2 + i);
}

HybridState apply_pulse(const HybridState& s, const MicrowavePulse& pulse) {
  if (pulse.rabi_mhz < 0.0) throw std::invalid_argument("engine: Rabi frequency must be >= 0");
  if (pulse.duration_ns < 0.0) throw std::invalid_argument("engine: pulse duration must be >= 0");
  Eigen::Matrix3cd u = pair_unitary(pulse.pair, pulse.rabi_mhz, pulse.duration_ns * 1e-3,
                                    pulse.phase_rad, pulse.detuning_mhz);
  HybridState out = s;
  out.rho = u * s.rho * u.adjoint();
  return out;
}

HybridState apply_ideal_rotation(const HybridState& s, spin::Pair pair, double angle_rad,
                                 double phase_rad) {
  // angle = 2 theta; reuse the resonant unitary with wr t = angle / (2 pi)
  Eigen::Matrix3cd u = pair_unitary(pair, 1.0, angle_rad / two_pi, phase_rad, 0.0);
  HybridState out = s;
  out.rho = u * s.rho * u.adjoint();
  return out;
}

bool hard_pulse_valid(const MicrowavePulse& pulse, const spin::TransitionFrequencies& f) {
  const double own = f.of(pulse.pair);
  double gap = std::numeric_limits<double>::infinity();
  for (spin::Pair p : {spin::Pair::xy, spin::Pair::yz, spin::Pair::xz}) {
    if (p == pulse.pair) continue;
    gap = std::min(gap, std::abs(f.of(p) - own));
  }
  return pulse.rabi_mhz <= 0.1 * gap;
}

double pi_duration_ns(double rabi_mhz) {
  if (rabi_mhz <= 0.0) throw std::invalid_argument("engine: Rabi frequency must be > 0");
  return 500.0 / rabi_mhz;  // 1/(2 Omega) in us, converted to ns
}

HybridState free_evolution(const HybridState& s, double t_us, const Decoherence& dec,
                           const kinetics::KineticRates& rates, const PairDetunings& deltas) {
  if (t_us < 0.0) throw std::invalid_argument("engine: evolution time must be >= 0");
  if (t_us == 0.0) return s;

  HybridState out = s;
  kinetics::Generator g = kinetics::rate_matrix(rates);
  out.set_populations(kinetics::evolve(s.populations(), t_us, g));

  for (spin::Pair p : {spin::Pair::xy, spin::Pair::yz, spin::Pair::xz}) {
    auto [la, lb] = spin::pair_levels(p);
    int a = int(la), b = int(lb);
    const double t2 = dec.t2(p);
    if (t2 <= 0.0) throw std::invalid_argument("engine: T2 must be > 0");
    std::complex<double> factor =
        std::exp(-t_us / t2) * std::exp(-I * two_pi * deltas[int(p)] * t_us);
    out.rho(a, b) = s.rho(a, b) * factor;
    out.rho(b, a) = std::conj(out.rho(a, b));
  }
  return out;
}

double readout(const HybridState& s, const kinetics::KineticRates& rates, double t_delay_us,
               double t_read_us) {
  kinetics::Populations n = s.populations();
  if (t_delay_us > 0.0)
    n = kinetics::evolve(n, t_delay_us, kinetics::rate_matrix(rates.with_pump(0.0)));
  return kinetics::pl_integral(n, t_read_us, kinetics::rate_matrix(rates), rates);
}

Eigen::Matrix3cd lab_frame_propagate(const Eigen::Matrix3cd& rho0,
                                     const Eigen::Vector3d& energies_mhz, spin::Pair pair,
                                     double carrier_mhz, double rabi_mhz, double duration_ns,
                                     double phase_rad, int steps_per_period) {
  if (carrier_mhz <= 0.0) throw std::invalid_argument("engine: carrier frequency must be > 0");
  if (steps_per_period < 4)
    throw std::invalid_argument("engine: need at least 4 steps per carrier period");

  auto [la, lb] = spin::pair_levels(pair);
  Eigen::Matrix3cd coupling = Eigen::Matrix3cd::Zero();
  coupling(int(la), int(lb)) = 1.0;
  coupling(int(lb), int(la)) = 1.0;
  const Eigen::Matrix3cd h0 = energies_mhz.cast<std::complex<double>>().asDiagonal();

  auto hamiltonian = [&](double t_us) -> Eigen::Matrix3cd {
    return h0 + rabi_mhz * std::cos(two_pi * carrier_mhz * t_us + phase_rad) * coupling;
  };

  // the step must resolve every frequency in h, not just the drive: the
  // bare splittings can exceed the carrier by an order of magnitude
  const double spread = energies_mhz.maxCoeff() - energies_mhz.minCoeff();
  const double f_max = std::max({carrier_mhz, spread, std::abs(rabi_mhz)});
  const double t_total = duration_ns * 1e-3;
  const double dt_target = 1.0 / (f_max * steps_per_period);
  const long nsteps = std::max(1L, std::lround(std::ceil(t_total / dt_target)));
  const double dt = t_total / double(nsteps);

  // midpoint-exponential stepper: each factor is exactly unitary, so the
  // trace survives arbitrarily long pulses; the only error is time ordering
  Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();
  double t = 0.0;
  for (long i = 0; i < nsteps; ++i) {
    Eigen::Matrix3cd h = hamiltonian(t + dt / 2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h);
    Eigen::Vector3cd phase;
    for (int k = 0; k < 3; ++k) phase(k) = std::exp(-I * two_pi * dt * es.eigenvalues()(k));
    u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint() * u;
    t += dt;
  }
  return u * rho0 * u.adjoint();
}

}  // namespace odmr::engine
