#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "hfevd/models.hpp"
#include "hfevd/simulation.hpp"
#include "support.hpp"

using namespace hfevd;
using hfevd_test::check_error;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

History row(std::initializer_list<double> v) { return History::from_row(vec(v)); }

std::vector<ModelSpec> invertible_models() {
  Eigen::MatrixXd A(2, 2), D(2, 2);
  A << 0.5, 0.1, -0.2, 0.3;
  D << 1.0, 0.0, 0.4, 0.8;
  TvarParams t;
  t.A1 = A;
  t.A2 = 0.5 * A;
  t.D1 = D;
  t.D2 = 1.5 * D;
  t.c1 = vec({0.1, -0.1});
  t.threshold = 0.2;
  t.trigger = 1;
  return {make_linear_svar(A, D), make_dar1(0.5, 1.0, 0.5), make_sv_threshold({}), make_sv_smooth({}), make_tvar(t)};
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("linear SVAR steps") {
  const ModelSpec noise = make_linear_svar(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
  CHECK(noise.step(row({3.0, -4.0}), vec({1.0, 2.0})).isApprox(vec({1.0, 2.0})));
  const ModelSpec decay = make_linear_svar(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Identity(1, 1));
  CHECK(decay.step(row({2.0}), vec({0.0}))(0) == 1.0);
  CHECK(decay.warnings().empty());
  check_error([] { make_linear_svar(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)); }, "model.construction");
  const ModelSpec unit = make_linear_svar(Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1));
  CHECK(unit.warnings().size() == 1);
}

TEST_CASE("linear SVAR composed h times is the partial moving average") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  const auto [A, D] = hfevd_test::random_stable(3, rng);
  const ModelSpec m = make_linear_svar(A, D);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 1 + trial % 5;
    Eigen::VectorXd y(3);
    for (auto& v : y) v = z(rng);
    Eigen::MatrixXd eps(h, 3);
    for (auto& v : eps.reshaped()) v = z(rng);
    const Eigen::MatrixXd path = iterate_path(m, History::from_row(y), eps);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(3);
    Eigen::MatrixXd Ai = Eigen::MatrixXd::Identity(3, 3);
    for (int i = 0; i < h; ++i) {
      expect += Ai * D * eps.row(h - 1 - i).transpose();
      Ai = A * Ai;
    }
    expect += Ai * y;
    CHECK((path.row(h - 1).transpose() - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("DAR(1)") {
  const ModelSpec m = make_dar1(0.5, 1.0, 0.5);
  CHECK(m.step(row({0.0}), vec({1.0}))(0) == 1.0);
  CHECK(m.step(row({2.0}), vec({0.0}))(0) == 1.0);
  CHECK(m.inverse(vec({1.0}), row({0.0}))(0) == 1.0);
  CHECK(m.step(row({2.0}), vec({1.0}))(0) == doctest::Approx(1.0 + std::sqrt(3.0)));
  check_error([] { make_dar1(0.5, 0.0, 0.5); }, "model.parameter");
  check_error([] { make_dar1(0.5, 1.0, -0.1); }, "model.parameter");
}

TEST_CASE("stochastic volatility models") {
  const StochasticVolatilityParams p{0.5, 0.7, 0.7, 0.4, 0.6};
  const ModelSpec thr = make_sv_threshold(p);
  CHECK(thr.step(row({0.0, 0.0}), vec({0.0, 0.0})).isApprox(vec({0.5, 0.0})));
  const Eigen::VectorXd below = thr.step(row({-1.0, 1.0}), vec({0.0, 0.0}));
  CHECK(below(0) == doctest::Approx(0.2));
  CHECK(below(1) == doctest::Approx(0.6));
  // Regime switch is inclusive at y = 0.
  CHECK(thr.step(row({0.0, 1.0}), vec({0.0, 0.0}))(0) == doctest::Approx(0.5 + 0.7));

  const ModelSpec smooth = make_sv_smooth({0.7, 0.7, 0.7, 0.4, 0.5});
  const Eigen::VectorXd s = smooth.step(row({0.0, 1.0}), vec({0.0, 0.0}));
  CHECK(s(0) == doctest::Approx(1.25));
  CHECK(s(1) == doctest::Approx(0.5));
}

TEST_CASE("TVAR regimes") {
  TvarParams t;
  t.A1 = Eigen::MatrixXd::Zero(2, 2);
  t.A2 = Eigen::MatrixXd::Identity(2, 2) * 0.5;
  t.D1 = Eigen::MatrixXd::Identity(2, 2);
  t.D2 = Eigen::MatrixXd::Identity(2, 2) * 2.0;
  t.threshold = 0.0;
  t.trigger = 1;
  const ModelSpec m = make_tvar(t);
  CHECK(m.step(row({1.0, 1.0}), vec({0.3, -0.2})).isApprox(vec({0.3, -0.2})));
  // Trigger equal to the threshold selects regime 1.
  CHECK(m.step(row({1.0, 0.0}), vec({0.3, -0.2})).isApprox(vec({0.3, -0.2})));

  Eigen::MatrixXd A1(2, 2), A2(2, 2);
  A1 << 0.5, 0.2, 0.1, 0.4;
  A2 << -0.3, 0.0, 0.6, 0.1;
  t.A1 = A1;
  t.A2 = A2;
  t.D1 << 1.0, 0.0, 0.5, 1.0;
  t.threshold = 0.17;
  const Eigen::VectorXd e = vec({0.2, -0.4});
  const Eigen::VectorXd hi = vec({1.0, 0.5}), lo = vec({1.0, -0.5});
  const ModelSpec m2 = make_tvar(t);
  CHECK(m2.step(History::from_row(hi), e).isApprox(A1 * hi + t.D1 * e));
  CHECK(m2.step(History::from_row(lo), e).isApprox(A2 * lo + t.D2 * e));

  t.D2 = Eigen::MatrixXd::Zero(2, 2);
  check_error([&] { make_tvar(t); }, "model.construction");
}

TEST_CASE("quadratic example") {
  const double a = 0.5, b = 0.7;
  const ModelSpec m = make_quadratic_example(a, b);
  CHECK(!m.has_inverse());
  CHECK(m.step(row({0.0, 1.0}), vec({1.0, 0.0})).isApprox(vec({1.0, b})));
  CHECK(m.step(row({0.0, 1.0}), vec({0.0, 0.0})).isApprox(vec({0.0, b})));

  // Three-step closed form.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    const double y1 = z(rng), y2 = z(rng);
    Eigen::MatrixXd e(3, 2);
    for (auto& v : e.reshaped()) v = z(rng);
    const Eigen::MatrixXd path = iterate_path(m, row({y1, y2}), e);
    const double e11 = e(0, 0), e12 = e(1, 0), e13 = e(2, 0), e21 = e(0, 1), e22 = e(1, 1);
    const double closed = a * a * a * y1 + a * a * y2 * e11 * e11 + a * (b * y2 + e21) * e12 * e12 +
                          (b * b * y2 + b * e21 + e22) * e13 * e13;
    CHECK(std::abs(path(2, 0) - closed) < 1e-12 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("inverse round-trip and determinism") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  for (const ModelSpec& m : invertible_models()) {
    CAPTURE(m.name());
    const int n = m.dimension();
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd y(n), e(n);
      for (auto& v : y) v = z(rng);
      for (auto& v : e) v = z(rng);
      const History h = History::from_row(y);
      const Eigen::VectorXd next = m.step(h, e);
      CHECK((m.inverse(next, h) - e).cwiseAbs().maxCoeff() < 1e-10);
      const Eigen::VectorXd again = m.step(h, e);
      CHECK(std::memcmp(next.data(), again.data(), sizeof(double) * static_cast<std::size_t>(n)) == 0);
    }
  }
}

TEST_CASE("rebuild from theta") {
  for (const ModelSpec& m : invertible_models()) {
    CAPTURE(m.name());
    const auto theta = m.theta_values();
    const ModelSpec same = m.with_theta(theta);
    CHECK(same.name() == m.name());
    CHECK(same.theta_values() == theta);
    const History h = History::from_row(Eigen::VectorXd::Constant(m.dimension(), 0.3));
    const Eigen::VectorXd e = Eigen::VectorXd::Constant(m.dimension(), -0.7);
    CHECK(same.step(h, e) == m.step(h, e));
  }
  const ModelSpec dar = make_dar1(0.5, 1.0, 0.5);
  check_error([&] { dar.with_theta(std::vector<double>{0.5, 1.0}); }, "model.dimension");
  check_error([&] { dar.with_theta(std::vector<double>{0.5, -1.0, 0.5}); }, "model.parameter");
}

TEST_CASE("history checks") {
  Eigen::MatrixXd bad(1, 1);
  bad(0, 0) = std::nan("");
  check_error([&] { History h(bad); }, "model.data");
  const ModelSpec m = make_dar1(0.5, 1.0, 0.5);
  check_error([&] { check_history(m, row({0.0, 1.0})); }, "model.dimension");
  check_error([&] { make_quadratic_example(0.5, 0.7).inverse(vec({0, 0}), row({0, 0})); }, "model.capability");
}

}  // TEST_SUITE
