#include "odmr/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odmr::quadrature {

GaussHermite gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("quadrature: order must be >= 1");
  // Jacobi matrix of the Hermite recurrence; off-diagonal sqrt(k/2).
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    double b = std::sqrt(k / 2.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(j);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("quadrature: Jacobi matrix eigensolver failed");

  const double mu0 = std::sqrt(std::numbers::pi);  // integral exp(-x^2) dx
  GaussHermite gh;
  gh.nodes.resize(order);
  gh.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    gh.nodes[i] = solver.eigenvalues()(i);
    double v0 = solver.eigenvectors()(0, i);
    gh.weights[i] = mu0 * v0 * v0;
  }
  return gh;
}

double gaussian_average(const std::function<double(double)>& f, double sigma, int order) {
  if (sigma < 0.0) throw std::invalid_argument("quadrature: sigma must be >= 0");
  if (sigma == 0.0) return f(0.0);
  static thread_local int cached_order = -1;
  static thread_local GaussHermite cached;
  if (order != cached_order) {
    cached = gauss_hermite(order);
    cached_order = order;
  }
  const double scale = std::numbers::sqrt2 * sigma;
  const double norm = 1.0 / std::sqrt(std::numbers::pi);
  double acc = 0.0;
  for (size_t i = 0; i < cached.nodes.size(); ++i)
    acc += cached.weights[i] * f(scale * cached.nodes[i]);
  return norm * acc;
}

}  // namespace odmr::quadrature
