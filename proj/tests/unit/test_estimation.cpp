#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hfevd/estimation.hpp"
#include "hfevd/models.hpp"
#include "hfevd/report_io.hpp"
#include "hfevd/simulation.hpp"
#include "support.hpp"

using namespace hfevd;
using hfevd_test::check_error;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

TvarParams two_regimes() {
  TvarParams p;
  p.A1 = mat2(0.6, 0.1, -0.2, 0.3);
  p.A2 = mat2(-0.3, 0.0, 0.2, 0.5);
  p.D1 = mat2(0.5, 0.0, 0.1, 0.4);
  p.D2 = mat2(1.0, 0.0, -0.3, 0.8);
  p.threshold = 0.17;
  p.trigger = 0;
  return p;
}

History zeros(int n) { return History::from_row(Eigen::VectorXd::Zero(n)); }

double lag1_autocorrelation(const Eigen::VectorXd& x) {
  const double m = x.mean();
  double num = 0.0, den = 0.0;
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    den += (x(t) - m) * (x(t) - m);
    if (t > 0) num += (x(t) - m) * (x(t - 1) - m);
  }
  return num / den;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("TVAR recovers threshold and regime matrices") {
  const TvarParams p = two_regimes();
  const Eigen::MatrixXd data = simulate_series(make_tvar(p), zeros(2), 5000, 12);
  const auto grid = threshold_grid(data, 0, 60);
  const TvarFit fit = tvar_fit(data, 0, grid);
  const double step = grid[1] - grid[0];
  CHECK(std::abs(fit.threshold - 0.17) <= step + 1e-12);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      CHECK(std::abs(fit.upper.A(r, c) - p.A1(r, c)) < 4.0 * fit.upper.A_se(r, c));
      CHECK(std::abs(fit.lower.A(r, c) - p.A2(r, c)) < 4.0 * fit.lower.A_se(r, c));
    }
  CHECK(fit.trace.size() == grid.size());
  // The optimum is the smallest AIC in the trace.
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pt : fit.trace)
    if (pt.feasible) best = std::min(best, pt.aic);
  CHECK(fit.aic == best);
  CHECK(fit.aic == doctest::Approx(2.0 * fit.parameters - 2.0 * fit.log_likelihood));
  CHECK(fit.upper.observations + fit.lower.observations == 4999);

  // The fitted model reproduces the same dynamics.
  const ModelSpec m = fit.to_model();
  Eigen::VectorXd y(2);
  y << 1.0, -0.5;
  const Eigen::VectorXd next = m.step(History::from_row(y), Eigen::VectorXd::Zero(2));
  CHECK((next - (fit.upper.A * y + fit.upper.c)).norm() < 1e-12);
}

TEST_CASE("TVAR without a threshold effect") {
  TvarParams p = two_regimes();
  p.A2 = p.A1;
  p.D2 = p.D1;
  const Eigen::MatrixXd data = simulate_series(make_tvar(p), zeros(2), 10000, 5);
  const TvarFit fit = tvar_fit(data, 0, threshold_grid(data, 0, 30));
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const double se = std::hypot(fit.upper.A_se(r, c), fit.lower.A_se(r, c));
      CHECK(std::abs(fit.upper.A(r, c) - fit.lower.A(r, c)) < 4.0 * se);
      CHECK(std::abs(fit.upper.A(r, c) - p.A1(r, c)) < 4.0 * fit.upper.A_se(r, c));
    }
  const Eigen::MatrixXd sigma = p.D1 * p.D1.transpose();
  const double band = 4.0 * std::sqrt(2.0 / static_cast<double>(fit.upper.observations));
  CHECK((fit.upper.sigma - sigma).cwiseAbs().maxCoeff() < band * sigma.cwiseAbs().maxCoeff() + band);
  // AIC differences across the grid stay within chi-square noise of the extra parameters.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& pt : fit.trace)
    if (pt.feasible) {
      lo = std::min(lo, pt.log_likelihood);
      hi = std::max(hi, pt.log_likelihood);
    }
  CHECK(hi - lo < 30.0);
}

TEST_CASE("TVAR on a single-point grid and failure modes") {
  const Eigen::MatrixXd data = simulate_series(make_tvar(two_regimes()), zeros(2), 2000, 9);
  std::vector<double> trig(data.rows() - 1);
  for (Eigen::Index t = 0; t + 1 < data.rows(); ++t) trig[static_cast<std::size_t>(t)] = data(t, 0);
  std::nth_element(trig.begin(), trig.begin() + static_cast<std::ptrdiff_t>(trig.size() / 2), trig.end());
  const double median = trig[trig.size() / 2];
  const TvarFit fit = tvar_fit(data, 0, {median});
  CHECK(fit.threshold == median);
  CHECK(fit.upper.observations > 900);
  CHECK(fit.lower.observations > 900);

  check_error([&] { tvar_fit(data.topRows(79), 0, {0.0}); }, "estimation.data");
  check_error([&] { tvar_fit(data, 0, {1e6}); }, "estimation.data");
  check_error([&] { tvar_fit(data, 0, {}); }, "estimation.data");
  check_error([&] { tvar_fit(data, 2, {0.0}); }, "estimation.parameter");
  Eigen::MatrixXd collinear = data;
  collinear.col(1) = 2.0 * collinear.col(0);
  check_error([&] { tvar_fit(collinear, 0, {median}); }, "estimation.rank");
}

TEST_CASE("TVAR fit JSON round trip") {
  const Eigen::MatrixXd data = simulate_series(make_tvar(two_regimes()), zeros(2), 2000, 3);
  const TvarFit fit = tvar_fit(data, 0, threshold_grid(data, 0, 10));
  const TvarFit back = tvar_fit_from_json(Json::parse(dump_json(to_json(fit))));
  CHECK(back.threshold == fit.threshold);
  CHECK(back.trigger == fit.trigger);
  CHECK(back.upper.A == fit.upper.A);
  CHECK(back.lower.D == fit.lower.D);
  CHECK(back.lower.c == fit.lower.c);
  CHECK(back.aic == fit.aic);
  CHECK(back.trace.size() == fit.trace.size());
}

TEST_CASE("Cholesky identification") {
  CHECK(cholesky_identify(Eigen::MatrixXd::Identity(3, 3)) == Eigen::MatrixXd::Identity(3, 3));
  const Eigen::MatrixXd D = cholesky_identify(mat2(4, 2, 2, 2));
  CHECK((D - mat2(2, 0, 1, 1)).cwiseAbs().maxCoeff() < 1e-15);
  std::mt19937_64 rng(1);
  const auto [A, L] = hfevd_test::random_stable(4, rng);
  const Eigen::MatrixXd sigma = L * L.transpose();
  const Eigen::MatrixXd F = cholesky_identify(sigma);
  CHECK((F * F.transpose() - sigma).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(F.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0));
  CHECK((F.diagonal().array() > 0.0).all());
  // Reversing the variable order gives a different impact matrix.
  const Eigen::MatrixXd R = mat2(2, 2, 2, 4);
  const Eigen::MatrixXd G = cholesky_identify(R);
  CHECK(std::abs(G(1, 0) - 1.0) > 0.1);
  check_error([] { cholesky_identify(mat2(1, 2, 2, 1)); }, "estimation.decomposition");
  check_error([] { cholesky_identify(mat2(1, 0.5, 0.4, 1)); }, "estimation.decomposition");
}

TEST_CASE("residual extraction") {
  std::mt19937_64 rng(2);
  const auto [A, D] = hfevd_test::random_stable(3, rng);
  const ModelSpec m = make_linear_svar(A, D);
  Eigen::MatrixXd eps(200, 3);
  std::normal_distribution<double> z;
  for (auto& v : eps.reshaped()) v = z(rng);
  const Eigen::MatrixXd data = iterate_path(m, zeros(3), eps);
  const Eigen::MatrixXd u = extract_residuals(m, data);
  REQUIRE(u.rows() == 199);
  CHECK((u - eps.bottomRows(199)).cwiseAbs().maxCoeff() < 1e-10);

  const ModelSpec dar = make_dar1(0.5, 1.0, 0.5);
  const Eigen::MatrixXd y = simulate_series(dar, zeros(1), 20000, 4);
  const Eigen::MatrixXd r = extract_residuals(dar, y);
  const double var = (r.array() - r.mean()).square().mean();
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(r.rows())));
  CHECK(std::abs(lag1_autocorrelation(r.col(0))) < 4.0 / std::sqrt(static_cast<double>(r.rows())));
  const Eigen::MatrixXd wrong = extract_residuals(make_dar1(0.0, 1.0, 0.5), y);
  CHECK(std::abs(lag1_autocorrelation(wrong.col(0))) > 4.0 / std::sqrt(static_cast<double>(wrong.rows())));

  check_error([&] { extract_residuals(make_quadratic_example(0.5, 0.7), Eigen::MatrixXd::Zero(10, 2)); },
              "estimation.capability");
  check_error([&] { extract_residuals(m, Eigen::MatrixXd::Zero(10, 2)); }, "estimation.dimension");
}

TEST_CASE("DAR(1) fit recovers parameters") {
  const Eigen::MatrixXd y = simulate_series(make_dar1(0.5, 1.0, 0.5), zeros(1), 100000, 6);
  const Dar1Fit f = dar1_fit(y.col(0));
  CHECK(f.phi == doctest::Approx(0.5).epsilon(0.03));
  CHECK(f.alpha == doctest::Approx(1.0).epsilon(0.1));
  CHECK(f.beta == doctest::Approx(0.5).epsilon(0.2));
  check_error([] { dar1_fit(Eigen::VectorXd::Zero(10)); }, "estimation.data");
  check_error([] { dar1_fit(Eigen::VectorXd::Zero(40)); }, "estimation.rank");
}

TEST_CASE("estimation risk of Hermite coefficients") {
  const ModelSpec dar = make_dar1(0.5, 2.0, 0.5);
  const History h0 = zeros(1);
  const EstimationRisk none = coefficient_estimation_risk(dar, Eigen::MatrixXd::Zero(3, 3), MultiIndex{1}, 0, h0, 1000, 1);
  CHECK(none.variance == 0.0);

  // C_1 = sqrt(alpha) at y = 0, so the variance is sigma_alpha / (4 alpha).
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  s(1, 1) = 0.3;
  const EstimationRisk r = coefficient_estimation_risk(dar, s, MultiIndex{1}, 0, h0, 200000, 2);
  CHECK(r.value == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
  CHECK(r.variance == doctest::Approx(0.3 / 8.0).epsilon(0.03));

  // Linear AR(1) at h = 1: C_1 = D, independent of A.
  const ModelSpec ar = make_linear_svar(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Constant(1, 1, 0.8));
  Eigen::MatrixXd sa = Eigen::MatrixXd::Zero(2, 2);
  sa(0, 0) = 1.0;
  const EstimationRisk ra = coefficient_estimation_risk(ar, sa, MultiIndex{1}, 0, h0, 10000, 3);
  CHECK(std::abs(ra.gradient(0)) < 1e-8);
  CHECK(ra.variance < 1e-14);
  Eigen::MatrixXd sd = Eigen::MatrixXd::Zero(2, 2);
  sd(1, 1) = 1.0;
  const EstimationRisk rd = coefficient_estimation_risk(ar, sd, MultiIndex{1}, 0, h0, 10000, 3);
  CHECK(rd.gradient(1) == doctest::Approx(1.0).epsilon(0.05));

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 3);
  bad(0, 0) = -1.0;
  check_error([&] { coefficient_estimation_risk(dar, bad, MultiIndex{1}, 0, h0, 100, 1); }, "estimation.parameter");
  check_error([&] { coefficient_estimation_risk(dar, Eigen::MatrixXd::Zero(2, 2), MultiIndex{1}, 0, h0, 100, 1); },
              "estimation.parameter");
}

}  // TEST_SUITE
