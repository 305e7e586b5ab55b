#include "hfevd/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hfevd/decomposition.hpp"
#include "hfevd/error.hpp"
#include "hfevd/parallel.hpp"
#include "hfevd/simulation.hpp"

namespace hfevd {

namespace {

struct Design {
  Eigen::MatrixXd X;  // regressors, (T-1) x (n + intercept)
  Eigen::MatrixXd Y;  // targets, (T-1) x n
  Eigen::VectorXd z;  // lagged trigger
};

Design make_design(const Eigen::MatrixXd& data, int trigger, bool intercept) {
  const Eigen::Index T = data.rows();
  const Eigen::Index n = data.cols();
  const Eigen::Index off = intercept ? 1 : 0;
  Design d;
  d.X.resize(T - 1, n + off);
  if (intercept) d.X.col(0).setOnes();
  d.X.rightCols(n) = data.topRows(T - 1);
  d.Y = data.bottomRows(T - 1);
  d.z = data.col(trigger).head(T - 1);
  return d;
}

RegimeFit fit_regime(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, bool intercept) {
  const Eigen::Index n = Y.cols();
  const Eigen::Index m = X.cols();
  const Eigen::Index T = X.rows();
  const Eigen::MatrixXd XtX = X.transpose() * X;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(XtX);
  if (qr.rank() < m) throw Error("estimation", Errc::rank, "regime regressor matrix is singular");
  const Eigen::MatrixXd XtXinv = qr.inverse();
  const Eigen::MatrixXd B = XtXinv * (X.transpose() * Y);  // m x n
  const Eigen::MatrixXd resid = Y - X * B;

  RegimeFit f;
  f.observations = static_cast<std::size_t>(T);
  f.sigma = resid.transpose() * resid / static_cast<double>(T);
  const Eigen::MatrixXd sigma_u = resid.transpose() * resid / static_cast<double>(std::max<Eigen::Index>(1, T - m));
  const Eigen::Index off = intercept ? 1 : 0;
  f.A = B.bottomRows(n).transpose();
  f.c = intercept ? Eigen::VectorXd(B.row(0).transpose()) : Eigen::VectorXd::Zero(n);
  f.A_se.resize(n, n);
  f.c_se = Eigen::VectorXd::Zero(n);
  for (Eigen::Index eq = 0; eq < n; ++eq) {
    for (Eigen::Index l = 0; l < n; ++l) f.A_se(eq, l) = std::sqrt(sigma_u(eq, eq) * XtXinv(off + l, off + l));
    if (intercept) f.c_se(eq) = std::sqrt(sigma_u(eq, eq) * XtXinv(0, 0));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(f.sigma);
  if (llt.info() != Eigen::Success) throw Error("estimation", Errc::rank, "regime residual covariance is singular");
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  f.log_likelihood = -0.5 * static_cast<double>(T) *
                     (logdet + static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + static_cast<double>(n));
  return f;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

double quantile_of(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

ModelSpec TvarFit::to_model() const {
  TvarParams p;
  p.A1 = upper.A;
  p.A2 = lower.A;
  p.D1 = upper.D;
  p.D2 = lower.D;
  p.c1 = upper.c;
  p.c2 = lower.c;
  p.threshold = threshold;
  p.trigger = trigger;
  return make_tvar(p);
}

std::vector<double> threshold_grid(const Eigen::MatrixXd& data, int trigger, int points, double min_frac) {
  if (data.rows() < 3) throw Error("estimation", Errc::data, "threshold grid needs at least 3 observations");
  if (trigger < 0 || trigger >= data.cols()) throw Error("estimation", Errc::parameter, "trigger out of range");
  if (points < 1) throw Error("estimation", Errc::parameter, "grid needs at least one point");
  std::vector<double> z(data.col(trigger).data(), data.col(trigger).data() + data.rows() - 1);
  const double lo = quantile_of(z, min_frac);
  const double hi = quantile_of(z, 1.0 - min_frac);
  std::vector<double> grid;
  for (int i = 0; i < points; ++i)
    grid.push_back(points == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (points - 1));
  return grid;
}

TvarFit tvar_fit(const Eigen::MatrixXd& data, int trigger, const std::vector<double>& grid,
                 const TvarOptions& options) {
  const Eigen::Index T = data.rows();
  const Eigen::Index n = data.cols();
  if (n < 1) throw Error("estimation", Errc::data, "data has no columns");
  if (T < 40 * n) throw Error("estimation", Errc::data, "TVAR fit needs T >= 40 n observations");
  if (!data.allFinite()) throw Error("estimation", Errc::data, "data contains non-finite values");
  if (trigger < 0 || trigger >= n) throw Error("estimation", Errc::parameter, "trigger out of range");
  if (grid.empty()) throw Error("estimation", Errc::data, "threshold grid is empty");

  const Design d = make_design(data, trigger, options.intercept);
  const auto rows = static_cast<double>(d.X.rows());
  const auto floor = static_cast<std::size_t>(
      std::max({20.0, 5.0 * static_cast<double>(n), std::ceil(options.min_regime_frac * rows)}));

  struct Candidate {
    CriterionPoint point;
    RegimeFit upper, lower;
  };
  std::vector<Candidate> cand(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  parallel_chunks(
      grid.size(),
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t g = begin; g < end; ++g) {
          auto& c = cand[g];
          c.point.threshold = grid[g];
          std::vector<Eigen::Index> up, down;
          for (Eigen::Index t = 0; t < d.X.rows(); ++t) (d.z(t) >= grid[g] ? up : down).push_back(t);
          if (up.size() < floor || down.size() < floor) continue;
          c.upper = fit_regime(select_rows(d.X, up), select_rows(d.Y, up), options.intercept);
          c.lower = fit_regime(select_rows(d.X, down), select_rows(d.Y, down), options.intercept);
          c.point.feasible = true;
        }
      },
      1);

  TvarFit fit;
  fit.trigger = trigger;
  fit.options = options;
  const int per_regime = static_cast<int>(n * (n + (options.intercept ? 1 : 0)) + n * (n + 1) / 2);
  fit.parameters = 2 * per_regime + 1;
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < cand.size(); ++g) {
    auto& c = cand[g];
    if (c.point.feasible) {
      c.point.log_likelihood = c.upper.log_likelihood + c.lower.log_likelihood;
      c.point.aic = 2.0 * fit.parameters - 2.0 * c.point.log_likelihood;
      if (!best || (options.minimize_aic ? c.point.aic < cand[*best].point.aic : c.point.aic > cand[*best].point.aic))
        best = g;
    }
    fit.trace.push_back(c.point);
  }
  if (!best)
    throw Error("estimation", Errc::data,
                "every threshold leaves a regime with fewer than " + std::to_string(floor) + " observations");
  const auto& b = cand[*best];
  fit.threshold = b.point.threshold;
  fit.upper = b.upper;
  fit.lower = b.lower;
  fit.upper.D = cholesky_identify(fit.upper.sigma);
  fit.lower.D = cholesky_identify(fit.lower.sigma);
  fit.log_likelihood = b.point.log_likelihood;
  fit.aic = b.point.aic;
  return fit;
}

Eigen::MatrixXd cholesky_identify(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.size() == 0)
    throw Error("estimation", Errc::decomposition, "covariance matrix must be square and nonempty");
  if (!sigma.allFinite() || !sigma.isApprox(sigma.transpose(), 1e-12))
    throw Error("estimation", Errc::decomposition, "covariance matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw Error("estimation", Errc::decomposition, "covariance matrix is not positive definite");
  return llt.matrixL();
}

Eigen::MatrixXd extract_residuals(const ModelSpec& model, const Eigen::MatrixXd& data) {
  if (!model.has_inverse()) throw Error("estimation", Errc::capability, "model '" + model.name() + "' has no inverse");
  const int p = model.lags();
  const int n = model.dimension();
  if (data.cols() != n) throw Error("estimation", Errc::dimension, "data width differs from the model dimension");
  if (data.rows() <= p) throw Error("estimation", Errc::data, "data must be longer than the lag order");
  Eigen::MatrixXd out(data.rows() - p, n);
  std::vector<double> lags(static_cast<std::size_t>(p * n));
  std::vector<double> obs(static_cast<std::size_t>(n));
  std::vector<double> eps(static_cast<std::size_t>(n));
  for (Eigen::Index t = p; t < data.rows(); ++t) {
    for (int l = 0; l < p; ++l)
      for (int c = 0; c < n; ++c) lags[static_cast<std::size_t>(l * n + c)] = data(t - 1 - l, c);
    for (int c = 0; c < n; ++c) obs[static_cast<std::size_t>(c)] = data(t, c);
    model.inverse(obs, lags, eps);
    for (int c = 0; c < n; ++c) out(t - p, c) = eps[static_cast<std::size_t>(c)];
  }
  return out;
}

Dar1Fit dar1_fit(const Eigen::VectorXd& series) {
  const Eigen::Index T = series.size();
  if (T < 30) throw Error("estimation", Errc::data, "DAR(1) fit needs at least 30 observations");
  const Eigen::VectorXd x = series.head(T - 1);
  const Eigen::VectorXd y = series.tail(T - 1);
  const double sxx = x.squaredNorm();
  if (!(sxx > 0.0)) throw Error("estimation", Errc::rank, "series is identically zero");
  Dar1Fit f;
  f.phi = x.dot(y) / sxx;
  const Eigen::VectorXd e2 = (y - f.phi * x).array().square();
  Eigen::MatrixXd Z(T - 1, 2);
  Z.col(0).setOnes();
  Z.col(1) = x.array().square();
  const Eigen::Vector2d ab = Z.colPivHouseholderQr().solve(e2);
  f.beta = std::max(0.0, ab(1));
  f.alpha = ab(1) >= 0.0 ? ab(0) : e2.mean();
  if (!(f.alpha > 0.0)) f.alpha = std::max(1e-8, e2.mean() - f.beta * Z.col(1).mean());
  return f;
}

EstimationRisk coefficient_estimation_risk(const ModelSpec& model, const Eigen::MatrixXd& sigma_theta,
                                           const MultiIndex& index, int component, const History& history,
                                           std::size_t S, std::uint64_t seed, double fd_step) {
  const auto theta = model.theta_values();
  const auto k = static_cast<Eigen::Index>(theta.size());
  if (sigma_theta.rows() != k || sigma_theta.cols() != k)
    throw Error("estimation", Errc::parameter, "sigma_theta must be square in the parameter dimension");
  if (!sigma_theta.allFinite() || !sigma_theta.isApprox(sigma_theta.transpose(), 1e-12))
    throw Error("estimation", Errc::parameter, "sigma_theta must be symmetric");
  if (k > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_theta, Eigen::EigenvaluesOnly);
    const double tol = 1e-12 * std::max(1.0, sigma_theta.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -tol)
      throw Error("estimation", Errc::parameter, "sigma_theta is not positive semidefinite");
  }
  if (component < 0 || component >= model.dimension())
    throw Error("estimation", Errc::parameter, "component out of range");
  if (index.size() % static_cast<std::size_t>(model.dimension()) != 0 || index.size() == 0)
    throw Error("estimation", Errc::dimension, "index length must be a multiple of n");
  if (!(fd_step > 0.0)) throw Error("estimation", Errc::parameter, "fd_step must be > 0");
  const int h = static_cast<int>(index.size()) / model.dimension();
  const double norm = hermite_variance(index);

  auto value_at = [&](const ModelSpec& m) {
    const auto batch = simulate_batch(m, history, h, S, seed);
    return estimate_coefficient(batch, index).coeff(component) * norm;
  };

  EstimationRisk risk;
  risk.value = value_at(model);
  risk.gradient = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (sigma_theta.row(i).isZero(0.0)) continue;
    const double step = fd_step * std::max(1.0, std::abs(theta[static_cast<std::size_t>(i)]));
    auto shifted = [&](double delta) -> std::optional<double> {
      auto t = theta;
      t[static_cast<std::size_t>(i)] += delta;
      try {
        return value_at(model.with_theta(t));
      } catch (const Error& e) {
        if (e.code() == Errc::parameter || e.code() == Errc::construction) return std::nullopt;
        throw;
      }
    };
    const auto up = shifted(step);
    const auto down = shifted(-step);
    if (up && down)
      risk.gradient(i) = (*up - *down) / (2.0 * step);
    else if (up)
      risk.gradient(i) = (*up - risk.value) / step;
    else if (down)
      risk.gradient(i) = (risk.value - *down) / step;
    else
      throw Error("estimation", Errc::parameter, "parameter " + model.theta()[static_cast<std::size_t>(i)].name +
                                                     " cannot be perturbed");
  }
  risk.variance = risk.gradient.dot(sigma_theta * risk.gradient);
  return risk;
}

}  // namespace hfevd
