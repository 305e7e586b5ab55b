#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "hfevd/error.hpp"

namespace hfevd_test {

// Monte Carlo agreement band, in standard errors.
inline constexpr double kSigmas = 4.0;

/// E[f(Z)] for Z ~ N(0,1) by adaptive Gauss-Kronrod over the real line.
inline double normal_expectation(const std::function<double(double)>& f) {
  auto g = [&](double x) { return f(x) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
  const double inf = std::numeric_limits<double>::infinity();
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -inf, inf, 15, 1e-13);
}

/// sum_{i<h} A^i D D' A^i'.
inline Eigen::MatrixXd linear_fevd(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D, int h) {
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(A.rows(), A.rows());
  Eigen::MatrixXd theta = D;
  for (int i = 0; i < h; ++i) {
    total += theta * theta.transpose();
    theta = A * theta;
  }
  return total;
}

/// Random A scaled to spectral radius `radius` and a lower-triangular D with
/// positive diagonal.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> random_stable(int n, std::mt19937_64& rng, double radius = 0.7) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd A(n, n), D = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) A(r, c) = z(rng);
  A *= radius / A.eigenvalues().cwiseAbs().maxCoeff();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < r; ++c) D(r, c) = 0.5 * z(rng);
    D(r, r) = 0.5 + std::abs(z(rng));
  }
  return {A, D};
}

/// Runs `fn`, requires an hfevd::Error with the given qualified code.
template <typename Fn>
void check_error(Fn&& fn, const std::string& code) {
  try {
    fn();
    FAIL("expected error " << code);
  } catch (const hfevd::Error& e) {
    CHECK(e.qualified_code() == code);
  }
}

}  // namespace hfevd_test
