#pragma once

#include <functional>
#include <vector>

// Gauss-Hermite quadrature for Gaussian ensemble averages:
// integral f(x) exp(-x^2) dx  ~=  sum w_i f(x_i).

namespace odmr::quadrature {

struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch nodes/weights for physicists' Hermite polynomials.
GaussHermite gauss_hermite(int order);

// Average of f over delta ~ N(0, sigma^2). sigma = 0 evaluates f(0).
double gaussian_average(const std::function<double(double)>& f, double sigma, int order = 21);

}  // namespace odmr::quadrature
