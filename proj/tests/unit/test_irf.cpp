#include <cmath>
#include <random>
#include <vector>

#include "hfevd/irf.hpp"
#include "hfevd/models.hpp"
#include "support.hpp"

using namespace hfevd;
using hfevd_test::check_error;
using hfevd_test::kSigmas;

namespace {

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

History zeros(int n) { return History::from_row(Eigen::VectorXd::Zero(n)); }

History qhist() {
  Eigen::VectorXd y(2);
  y << 0.0, 1.0;
  return History::from_row(y);
}

Eigen::MatrixXd power(const Eigen::MatrixXd& A, int k) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) P = A * P;
  return P;
}

}  // namespace

TEST_SUITE("irf") {

TEST_CASE("linear EIRF is the moving-average column") {
  std::mt19937_64 rng(2);
  const auto [A, D] = hfevd_test::random_stable(3, rng);
  const ModelSpec m = make_linear_svar(A, D);
  std::normal_distribution<double> z;
  for (int h = 1; h <= 4; ++h) {
    Eigen::VectorXd y(3);
    for (auto& v : y) v = z(rng);
    const IrfEstimate e = eirf(m, History::from_row(y), h, {1, 0.7, ShockKind::additive}, 2000, 5);
    const Eigen::VectorXd oracle = power(A, h - 1) * D.col(1) * 0.7;
    CHECK((e.mean - oracle).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(e.se.maxCoeff() < 1e-8);
  }
  // delta = 0 gives identical paths.
  const IrfEstimate zero = eirf(m, zeros(3), 3, {0, 0.0, ShockKind::additive}, 100, 1);
  CHECK(zero.mean.isZero(0.0));
}

TEST_CASE("linear EIRF: proportional to delta and history invariant") {
  std::mt19937_64 rng(3);
  const auto [A, D] = hfevd_test::random_stable(2, rng);
  const ModelSpec m = make_linear_svar(A, D);
  const IrfEstimate unit = eirf(m, zeros(2), 3, {0, 1.0, ShockKind::additive}, 500, 2);
  for (double d : {-2.0, -1.0, 0.5, 1.0, 2.0}) {
    const IrfEstimate e = eirf(m, zeros(2), 3, {0, d, ShockKind::additive}, 500, 2);
    CHECK((e.mean - d * unit.mean).cwiseAbs().maxCoeff() < 1e-12);
  }
  std::normal_distribution<double> z;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd y(2);
    y << 3.0 * z(rng), 3.0 * z(rng);
    const IrfEstimate e = eirf(m, History::from_row(y), 3, {0, 1.0, ShockKind::additive}, 500, 2 + k);
    CHECK((e.mean - unit.mean).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("DAR(1) EIRF") {
  const ModelSpec m = make_dar1(0.5, 1.0, 0.5);
  // At y = 0 the first step is linear in eps: exactly delta.
  const IrfEstimate h1 = eirf(m, zeros(1), 1, {0, 1.0, ShockKind::additive}, 1000, 3);
  CHECK(h1.mean(0) == doctest::Approx(1.0).epsilon(1e-14));
  // The conditional mean stays linear: phi^(h-1) delta.
  const IrfEstimate h3 = eirf(m, zeros(1), 3, {0, 1.0, ShockKind::additive}, 200000, 4);
  CHECK(std::abs(h3.mean(0) - 0.25) < kSigmas * h3.se(0));
}

TEST_CASE("threshold SV: EIRF of a volatility shock against a closed form") {
  const StochasticVolatilityParams p{0.5, 0.7, 0.7, 0.4, 0.6};
  const ModelSpec m = make_sv_threshold(p);
  const double delta = 0.5;
  const IrfEstimate e = eirf(m, zeros(2), 2, {1, delta, ShockKind::additive}, 400000, 8);
  // y_{t+1} = a + eps_1 selects the regime; z_{t+1} moves by delta.
  const double oracle = delta * (p.a1 * Phi(p.a) + p.a2 * (1.0 - Phi(p.a)));
  CHECK(std::abs(e.mean(0) - oracle) < kSigmas * e.se(0));
  CHECK(e.mean(1) == doctest::Approx(p.phi * delta).epsilon(1e-12));
}

TEST_CASE("GIRF and MIT shocks") {
  std::mt19937_64 rng(5);
  const auto [A, D] = hfevd_test::random_stable(2, rng);
  const ModelSpec lin = make_linear_svar(A, D);
  const IrfEstimate g = girf(lin, zeros(2), 1, {0, 0.8, ShockKind::pegged}, 200000, 6);
  const IrfEstimate e = eirf(lin, zeros(2), 1, {0, 0.8, ShockKind::additive}, 200000, 6);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(g.mean(i) - 0.8 * D(i, 0)) < kSigmas * g.se(i));
    CHECK(std::abs(g.mean(i) - e.mean(i)) < kSigmas * g.se(i));
  }
  const Eigen::VectorXd mit = mit_irf(lin, zeros(2), 3, {0, 0.8, ShockKind::mit});
  CHECK((mit - power(A, 2) * D.col(0) * 0.8).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(mit_irf(lin, zeros(2), 3, {1, 0.0, ShockKind::mit}).isZero(0.0));

  check_error([&] { girf(lin, zeros(2), 1, {0, 1.0, ShockKind::additive}, 10, 1); }, "irf.parameter");
  check_error([&] { eirf(lin, zeros(2), 1, {0, 1.0, ShockKind::pegged}, 10, 1); }, "irf.parameter");
  check_error([&] { eirf(lin, zeros(2), 1, {2, 1.0, ShockKind::additive}, 10, 1); }, "irf.parameter");
}

TEST_CASE("shock definitions diverge when g is nonlinear in eps") {
  // Quadratic example, y_1 at h = 1 with y_2 = 1: Y(delta) - Y = (eps + delta)^2 - eps^2.
  const ModelSpec q = make_quadratic_example(0.5, 0.7);
  const double small = 1e-3;
  const IrfEstimate e = eirf(q, qhist(), 1, {0, small, ShockKind::additive}, 200000, 9);
  const IrfEstimate g = girf(q, qhist(), 1, {0, small, ShockKind::pegged}, 200000, 9);
  CHECK(std::abs(e.mean(0) - small * small) < kSigmas * e.se(0) + 1e-12);
  const double girf_limit = small * small - hfevd_test::normal_expectation([](double x) { return x * x; });
  CHECK(std::abs(g.mean(0) - girf_limit) < kSigmas * g.se(0));
  CHECK(std::abs(g.mean(0)) > 0.9);
  CHECK(mit_irf(q, qhist(), 1, {0, 2.0, ShockKind::mit})(0) == doctest::Approx(4.0));
}

TEST_CASE("response paths") {
  const ModelSpec m = make_dar1(0.5, 1.0, 0.5);
  const IrfPath p = irf_path(m, zeros(1), 4, {0, 1.0, ShockKind::additive}, 50000, 3);
  CHECK(p.mean.rows() == 4);
  const IrfEstimate last = eirf(m, zeros(1), 4, {0, 1.0, ShockKind::additive}, 50000, 3);
  CHECK(p.mean(3, 0) == last.mean(0));
  const IrfPath mit = irf_path(m, zeros(1), 3, {0, 1.0, ShockKind::mit}, 0, 0);
  CHECK(mit.mean(0, 0) == doctest::Approx(1.0));
  CHECK(mit.mean(2, 0) == doctest::Approx(0.25));
  CHECK(mit.se.isZero(0.0));
}

TEST_CASE("impact multipliers") {
  std::mt19937_64 rng(7);
  const auto [A, D] = hfevd_test::random_stable(2, rng);
  const ModelSpec lin = make_linear_svar(A, D);
  const IrfEstimate d1 = impact_multiplier(lin, zeros(2), 1, 1, 1000, 1);
  CHECK((d1.mean - D.col(1)).cwiseAbs().maxCoeff() < 1e-9);
  const IrfEstimate d2 = impact_multiplier(lin, zeros(2), 2, 1, 1000, 1);
  CHECK(d2.mean.cwiseAbs().maxCoeff() < 1e-6);

  const ModelSpec q = make_quadratic_example(0.5, 0.7);
  const IrfEstimate q2 = impact_multiplier(q, qhist(), 2, 0, 1000, 2);
  CHECK(q2.mean(0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(q2.mean(1)) < 1e-8);
  const IrfEstimate cross = cross_multiplier(q, qhist(), {1, 1}, 1000, 2);
  CHECK(cross.mean.cwiseAbs().maxCoeff() < 1e-8);

  check_error([&] { impact_multiplier(lin, zeros(2), 1, 0, 10, 1, 0.0); }, "irf.parameter");
  check_error([&] { impact_multiplier(lin, zeros(2), 5, 0, 10, 1); }, "irf.parameter");
  CHECK(default_fd_step(2) == 1e-2);
  CHECK(default_fd_step(3) == 5e-2);
}

TEST_CASE("multiplier link at horizon one") {
  std::mt19937_64 rng(11);
  const auto [A, D] = hfevd_test::random_stable(2, rng);
  const MultiplierLink lin = verify_multiplier_link(make_linear_svar(A, D), zeros(2), {0, 1}, 100000, 3);
  const Eigen::MatrixXd dd = D.col(1) * D.col(1).transpose();
  CHECK((lin.from_multiplier - dd).cwiseAbs().maxCoeff() < 1e-8);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(lin.hfevd(i, i) - dd(i, i)) < kSigmas * lin.hfevd_se(i));

  // DAR(1) at y = 0: g = eps, both sides equal alpha = 1.
  const MultiplierLink dar = verify_multiplier_link(make_dar1(0.5, 1.0, 0.5), zeros(1), {1}, 100000, 4);
  CHECK(dar.from_multiplier(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(dar.hfevd(0, 0) - 1.0) < kSigmas * dar.hfevd_se(0));

  const MultiplierLink q = verify_multiplier_link(make_quadratic_example(0.5, 0.7), qhist(), {2, 0}, 200000, 5);
  CHECK(q.from_multiplier(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(q.hfevd(0, 0) - 2.0) < kSigmas * q.hfevd_se(0));
  CHECK(std::abs(q.from_multiplier(1, 1)) < 1e-10);

  const ModelSpec emp = make_dar1(0.5, 1.0, 0.5, InnovationKind::empirical({EmpiricalDistribution({-1.0, 0.0, 1.0})}));
  check_error([&] { verify_multiplier_link(emp, zeros(1), {1}, 100, 1); }, "irf.capability");
}

}  // TEST_SUITE
