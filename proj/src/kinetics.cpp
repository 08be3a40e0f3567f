#include "odmr/kinetics.hpp"

#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace odmr::kinetics {

void KineticRates::validate() const {
  if (pump_rate < 0.0) throw std::invalid_argument("kinetics: pump rate must be >= 0");
  if (s1_decay_rate <= 0.0) throw std::invalid_argument("kinetics: S1 decay rate must be > 0");
  if (isc_yield < 0.0 || isc_yield > 1.0)
    throw std::invalid_argument("kinetics: ISC yield must lie in [0, 1]");
  if ((branching.array() < 0.0).any())
    throw std::invalid_argument("kinetics: branching ratios must be >= 0");
  if (std::abs(branching.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("kinetics: branching ratios must sum to 1");
  if ((depop_rates.array() <= 0.0).any())
    throw std::invalid_argument("kinetics: sublevel decay rates must be > 0");
}

Generator rate_matrix(const KineticRates& r, const std::optional<MicrowaveMixing>& mixing) {
  r.validate();
  Generator g = Generator::Zero();
  g(0, 0) -= r.pump_rate;
  g(1, 0) += r.pump_rate;
  g(1, 1) -= r.s1_decay_rate;
  g(0, 1) += (1.0 - r.isc_yield) * r.s1_decay_rate;
  for (int i = 0; i < 3; ++i) {
    g(2 + i, 1) += r.isc_yield * r.s1_decay_rate * r.branching(i);
    g(2 + i, 2 + i) -= r.depop_rates(i);
    g(0, 2 + i) += r.depop_rates(i);
  }
  if (mixing) {
    if (mixing->rate < 0.0) throw std::invalid_argument("kinetics: mixing rate must be >= 0");
    auto [a, b] = spin::pair_levels(mixing->pair);
    int ia = 2 + int(a), ib = 2 + int(b);
    g(ia, ia) -= mixing->rate;
    g(ib, ia) += mixing->rate;
    g(ib, ib) -= mixing->rate;
    g(ia, ib) += mixing->rate;
  }
  return g;
}

Populations evolve(const Populations& n0, double t_us, const Generator& g) {
  if (t_us < 0.0) throw std::invalid_argument("kinetics: evolution time must be >= 0");
  if (t_us == 0.0) return n0;
  Eigen::Matrix<double, 5, 5> p = (g * t_us).exp();
  return p * n0;
}

Populations steady_state(const Generator& g) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 5, 5>> svd(g, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = sv(0) > 0.0 ? sv(0) : 1.0;
  int null_dim = 0;
  for (int i = 0; i < 5; ++i)
    if (sv(i) <= 1e-12 * scale) ++null_dim;
  if (null_dim != 1)
    throw std::runtime_error("kinetics: steady state is not unique (disconnected rates?)");
  Eigen::Matrix<double, 5, 1> v = svd.matrixV().col(4);
  double s = v.sum();
  if (std::abs(s) < 1e-12)
    throw std::runtime_error("kinetics: null vector has zero total population");
  return v / s;
}

double pl_rate(const Populations& n, const KineticRates& r) {
  return (1.0 - r.isc_yield) * r.s1_decay_rate * n(1);
}

double pl_integral(const Populations& n0, double t_us, const Generator& g,
                   const KineticRates& r) {
  if (t_us < 0.0) throw std::invalid_argument("kinetics: readout window must be >= 0");
  if (t_us == 0.0) return 0.0;
  // augment with a row integrating n_S1
  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
  a.topLeftCorner<5, 5>() = g;
  a(5, 1) = 1.0;
  Eigen::Matrix<double, 6, 1> v;
  v << n0, 0.0;
  Eigen::Matrix<double, 6, 1> out = (a * t_us).exp() * v;
  return (1.0 - r.isc_yield) * r.s1_decay_rate * out(5);
}

KineticRates project_rates(const spin::Eigensystem& es, const KineticRates& zf) {
  zf.validate();
  // w(i, k) = |<e_i | T_k>|^2 with i indexed by label
  const spin::Matrix3c& t = spin::zero_field_states();
  KineticRates out = zf;
  for (int i = 0; i < 3; ++i) {
    const auto col = es.states.col(es.column_of_label[i]);
    double p = 0.0, k = 0.0;
    for (int z = 0; z < 3; ++z) {
      double w = std::norm(t.col(z).dot(col));
      p += w * zf.branching(z);
      k += w * zf.depop_rates(z);
    }
    out.branching(i) = p;
    out.depop_rates(i) = k;
  }
  // eigenvectors are complete, so the weights are doubly stochastic up
  // to roundoff; renormalise the branching sum exactly
  out.branching /= out.branching.sum();
  return out;
}

double cw_odmr_contrast(const spin::ZfsParameters& zfs, const KineticRates& rates,
                        spin::Pair pair, double mixing_rate, const spin::Vector3& b_lab_mt,
                        const spin::Orientation& site) {
  spin::Eigensystem es = spin::site_eigensystem(zfs, site, b_lab_mt);
  KineticRates eff = project_rates(es, rates);
  Generator off = rate_matrix(eff);
  Generator on = rate_matrix(eff, MicrowaveMixing{pair, mixing_rate});
  double pl_off = pl_rate(steady_state(off), eff);
  double pl_on = pl_rate(steady_state(on), eff);
  if (pl_off <= 0.0) throw std::runtime_error("kinetics: reference PL is zero (no pumping?)");
  return (pl_on - pl_off) / pl_off;
}

}  // namespace odmr::kinetics
