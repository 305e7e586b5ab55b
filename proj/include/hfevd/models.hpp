#pragma once

#include <Eigen/Dense>

#include "hfevd/model.hpp"

namespace hfevd {

/// Y_t = A Y_{t-1} + D u_t. Singular D throws Errc::construction; a spectral
/// radius >= 1 only adds a warning.
/// theta = (vec(A), vec(D)), column-major.
ModelSpec make_linear_svar(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D,
                           InnovationKind innovations = InnovationKind::gaussian());

/// DAR(1): y_t = phi y_{t-1} + sqrt(alpha + beta y_{t-1}^2) u_t.
/// theta = (phi, alpha, beta).
ModelSpec make_dar1(double phi, double alpha, double beta, InnovationKind innovations = InnovationKind::gaussian());

struct StochasticVolatilityParams {
  double a = 0.5;
  double b = 0.7;
  double a1 = 0.7;
  double a2 = 0.4;
  double phi = 0.6;
};

/// State (y, z):
///   y_t = a + b y_{t-1} + [a1 1{y_{t-1} >= 0} + a2 1{y_{t-1} < 0}] z_{t-1} + exp(z_{t-1}) u_{1,t}
///   z_t = phi z_{t-1} + u_{2,t}
ModelSpec make_sv_threshold(const StochasticVolatilityParams& params);

/// Logistic blend a1 + (a2 - a1) / (1 + exp(-y_{t-1})) in place of the regime switch.
ModelSpec make_sv_smooth(const StochasticVolatilityParams& params);

struct TvarParams {
  Eigen::MatrixXd A1, A2;  // regime 1: trigger >= threshold
  Eigen::MatrixXd D1, D2;
  Eigen::VectorXd c1, c2;  // intercepts; empty means zero
  double threshold = 0.0;
  int trigger = 0;  // 0-based component of Y_{t-1} that selects the regime
};

/// Self-exciting TVAR(1): (A1, D1, c1) when Y_{trigger,t-1} >= threshold,
/// otherwise (A2, D2, c2).
ModelSpec make_tvar(const TvarParams& params, InnovationKind innovations = InnovationKind::gaussian());

/// Bivariate quadratic example with closed-form decomposition:
///   y_{1,t} = a y_{1,t-1} + y_{2,t-1} u_{1,t}^2
///   y_{2,t} = b y_{2,t-1} + u_{2,t}
/// Not invertible in u_1 (sign), so no inverse is attached.
ModelSpec make_quadratic_example(double a, double b, InnovationKind innovations = InnovationKind::gaussian());

}  // namespace hfevd
