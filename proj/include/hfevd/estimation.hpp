#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hfevd/hermite.hpp"
#include "hfevd/model.hpp"
#include "hfevd/models.hpp"

namespace hfevd {

struct RegimeFit {
  Eigen::MatrixXd A;      // n x n
  Eigen::VectorXd c;      // intercepts (zero when disabled)
  Eigen::MatrixXd A_se;   // OLS standard errors of A
  Eigen::VectorXd c_se;
  Eigen::MatrixXd sigma;  // ML residual covariance
  Eigen::MatrixXd D;      // lower Cholesky factor of sigma
  std::size_t observations = 0;
  double log_likelihood = 0.0;
};

struct CriterionPoint {
  double threshold = 0.0;
  bool feasible = false;
  double log_likelihood = 0.0;
  double aic = 0.0;
};

struct TvarOptions {
  bool intercept = true;
  /// AIC = 2k - 2 logL is minimized; false selects the largest value.
  bool minimize_aic = true;
  double min_regime_frac = 0.15;
};

/// Regime 1 (`upper`) holds observations whose lagged trigger is >= the
/// threshold.
struct TvarFit {
  double threshold = 0.0;
  int trigger = 0;
  RegimeFit upper;
  RegimeFit lower;
  double log_likelihood = 0.0;
  double aic = 0.0;
  int parameters = 0;
  TvarOptions options;
  std::vector<CriterionPoint> trace;

  ModelSpec to_model() const;
};

/// Evenly spaced thresholds between the min_frac and 1 - min_frac quantiles
/// of the lagged trigger.
std::vector<double> threshold_grid(const Eigen::MatrixXd& data, int trigger, int points = 50,
                                   double min_frac = 0.15);

/// Grid search over thresholds with per-regime OLS and a pooled Gaussian
/// likelihood. Throws estimation.data when T < 40 n or when no grid point
/// leaves max(20, 5n, min_regime_frac*T) observations in both regimes, and
/// estimation.rank on a singular regressor matrix.
TvarFit tvar_fit(const Eigen::MatrixXd& data, int trigger, const std::vector<double>& grid,
                 const TvarOptions& options = {});

/// Lower-triangular D with positive diagonal and D D' = sigma. Throws
/// estimation.decomposition when sigma is not symmetric positive definite.
Eigen::MatrixXd cholesky_identify(const Eigen::MatrixXd& sigma);

/// Applies the model inverse to rows p..T-1 of `data`.
Eigen::MatrixXd extract_residuals(const ModelSpec& model, const Eigen::MatrixXd& data);

struct Dar1Fit {
  double phi = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
};

/// phi by least squares of y_t on y_{t-1}; (alpha, beta) by least squares of
/// the squared residual on (1, y_{t-1}^2), projected onto alpha > 0, beta >= 0.
Dar1Fit dar1_fit(const Eigen::VectorXd& series);

struct EstimationRisk {
  double value = 0.0;  // prod k_i! * C_K for the chosen component
  Eigen::VectorXd gradient;
  double variance = 0.0;  // gradient' Sigma gradient
};

/// Delta-method variance of prod k_i! * C_K(theta) for one output component.
/// The gradient is a central difference in theta of the Monte Carlo estimate
/// on a common seed (one-sided where a perturbed theta is inadmissible).
/// Parameters with a zero row in sigma_theta are skipped.
EstimationRisk coefficient_estimation_risk(const ModelSpec& model, const Eigen::MatrixXd& sigma_theta,
                                           const MultiIndex& index, int component, const History& history,
                                           std::size_t S, std::uint64_t seed, double fd_step = 1e-4);

}  // namespace hfevd
