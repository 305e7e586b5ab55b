#include "hfevd/models.hpp"

#include <cmath>
#include <sstream>

#include "hfevd/error.hpp"

namespace hfevd {

namespace {

using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

ConstVecMap as_vec(std::span<const double> s, std::size_t n) { return {s.data(), static_cast<Eigen::Index>(n)}; }
VecMap as_vec(std::span<double> s, std::size_t n) { return {s.data(), static_cast<Eigen::Index>(n)}; }

void append_matrix(std::vector<NamedValue>& theta, const std::string& prefix, const Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      theta.push_back({prefix + "[" + std::to_string(r + 1) + "," + std::to_string(c + 1) + "]", m(r, c)});
}

void append_vector(std::vector<NamedValue>& theta, const std::string& prefix, const Eigen::VectorXd& v) {
  for (Eigen::Index r = 0; r < v.size(); ++r) theta.push_back({prefix + "[" + std::to_string(r + 1) + "]", v(r)});
}

Eigen::MatrixXd take_matrix(std::span<const double> theta, std::size_t& pos, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = theta[pos++];
  return m;
}

Eigen::VectorXd take_vector(std::span<const double> theta, std::size_t& pos, Eigen::Index rows) {
  Eigen::VectorXd v(rows);
  for (Eigen::Index r = 0; r < rows; ++r) v(r) = theta[pos++];
  return v;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& D, const std::string& what) {
  if (D.rows() != D.cols()) throw Error("model", Errc::construction, what + " must be square");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
  if (!lu.isInvertible()) throw Error("model", Errc::construction, what + " is singular");
  return lu.inverse();
}

double spectral_radius(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

ModelSpec make_linear_svar(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D, InnovationKind innovations) {
  const auto n = static_cast<std::size_t>(D.rows());
  if (A.rows() != D.rows() || A.cols() != D.rows())
    throw Error("model", Errc::construction, "A and D must both be n x n");
  const Eigen::MatrixXd Dinv = checked_inverse(D, "impact matrix D");

  std::vector<NamedValue> theta;
  append_matrix(theta, "A", A);
  append_matrix(theta, "D", D);

  StepFn step = [A, D, n](LagState lags, std::span<const double> u, std::span<double> next) {
    as_vec(next, n).noalias() = A * as_vec(lags, n) + D * as_vec(u, n);
  };
  InverseFn inv = [A, Dinv, n](std::span<const double> y, LagState lags, std::span<double> u) {
    as_vec(u, n).noalias() = Dinv * (as_vec(y, n) - A * as_vec(lags, n));
  };

  ModelSpec model("linear_svar", static_cast<int>(n), 1, std::move(theta), std::move(step), std::move(inv),
                  std::move(innovations));
  const auto rows = D.rows();
  model = model.with_builder([rows](std::span<const double> t) {
    std::size_t pos = 0;
    Eigen::MatrixXd a = take_matrix(t, pos, rows, rows);
    Eigen::MatrixXd d = take_matrix(t, pos, rows, rows);
    return make_linear_svar(a, d);
  });
  if (const double rho = spectral_radius(A); rho >= 1.0) {
    std::ostringstream os;
    os << "spectral radius of A is " << rho << " (>= 1): the model is not stable";
    model = model.with_warning(os.str());
  }
  return model;
}

ModelSpec make_dar1(double phi, double alpha, double beta, InnovationKind innovations) {
  if (!(alpha > 0.0)) throw Error("model", Errc::parameter, "DAR(1) needs alpha > 0");
  if (!(beta >= 0.0)) throw Error("model", Errc::parameter, "DAR(1) needs beta >= 0");

  StepFn step = [phi, alpha, beta](LagState lags, std::span<const double> u, std::span<double> next) {
    const double y = lags[0];
    next[0] = phi * y + std::sqrt(alpha + beta * y * y) * u[0];
  };
  InverseFn inv = [phi, alpha, beta](std::span<const double> obs, LagState lags, std::span<double> u) {
    const double y = lags[0];
    u[0] = (obs[0] - phi * y) / std::sqrt(alpha + beta * y * y);
  };
  ModelSpec model("dar1", 1, 1, {{"phi", phi}, {"alpha", alpha}, {"beta", beta}}, std::move(step), std::move(inv),
                  std::move(innovations));
  return model.with_builder([](std::span<const double> t) { return make_dar1(t[0], t[1], t[2]); });
}

namespace {

template <typename Coefficient>
ModelSpec make_sv(const std::string& name, const StochasticVolatilityParams& p, Coefficient coefficient,
                  ModelSpec (*rebuild)(const StochasticVolatilityParams&)) {
  StepFn step = [p, coefficient](LagState lags, std::span<const double> u, std::span<double> next) {
    const double y = lags[0];
    const double z = lags[1];
    next[0] = p.a + p.b * y + coefficient(p, y) * z + std::exp(z) * u[0];
    next[1] = p.phi * z + u[1];
  };
  InverseFn inv = [p, coefficient](std::span<const double> obs, LagState lags, std::span<double> u) {
    const double y = lags[0];
    const double z = lags[1];
    u[0] = (obs[0] - p.a - p.b * y - coefficient(p, y) * z) / std::exp(z);
    u[1] = obs[1] - p.phi * z;
  };
  ModelSpec model(name, 2, 1, {{"a", p.a}, {"b", p.b}, {"a1", p.a1}, {"a2", p.a2}, {"phi", p.phi}}, std::move(step),
                  std::move(inv));
  return model.with_builder([rebuild](std::span<const double> t) {
    return rebuild(StochasticVolatilityParams{t[0], t[1], t[2], t[3], t[4]});
  });
}

}  // namespace

ModelSpec make_sv_threshold(const StochasticVolatilityParams& params) {
  return make_sv(
      "sv_threshold", params,
      [](const StochasticVolatilityParams& p, double y) { return y >= 0.0 ? p.a1 : p.a2; }, &make_sv_threshold);
}

ModelSpec make_sv_smooth(const StochasticVolatilityParams& params) {
  return make_sv(
      "sv_smooth", params,
      [](const StochasticVolatilityParams& p, double y) { return p.a1 + (p.a2 - p.a1) / (1.0 + std::exp(-y)); },
      &make_sv_smooth);
}

ModelSpec make_tvar(const TvarParams& params, InnovationKind innovations) {
  const Eigen::Index n = params.A1.rows();
  for (const auto* m : {&params.A1, &params.A2, &params.D1, &params.D2})
    if (m->rows() != n || m->cols() != n) throw Error("model", Errc::construction, "TVAR regime matrices must be n x n");
  if (params.trigger < 0 || params.trigger >= n)
    throw Error("model", Errc::construction, "TVAR trigger component out of range");
  const Eigen::VectorXd c1 = params.c1.size() ? params.c1 : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd c2 = params.c2.size() ? params.c2 : Eigen::VectorXd::Zero(n);
  if (c1.size() != n || c2.size() != n) throw Error("model", Errc::construction, "TVAR intercepts must have length n");
  const Eigen::MatrixXd D1inv = checked_inverse(params.D1, "regime-1 impact matrix D1");
  const Eigen::MatrixXd D2inv = checked_inverse(params.D2, "regime-2 impact matrix D2");

  const auto un = static_cast<std::size_t>(n);
  const double r = params.threshold;
  const int trig = params.trigger;
  StepFn step = [A1 = params.A1, A2 = params.A2, D1 = params.D1, D2 = params.D2, c1, c2, r, trig, un](
                    LagState lags, std::span<const double> u, std::span<double> next) {
    const bool upper = lags[static_cast<std::size_t>(trig)] >= r;
    if (upper)
      as_vec(next, un).noalias() = c1 + A1 * as_vec(lags, un) + D1 * as_vec(u, un);
    else
      as_vec(next, un).noalias() = c2 + A2 * as_vec(lags, un) + D2 * as_vec(u, un);
  };
  InverseFn inv = [A1 = params.A1, A2 = params.A2, D1inv, D2inv, c1, c2, r, trig, un](
                      std::span<const double> obs, LagState lags, std::span<double> u) {
    const bool upper = lags[static_cast<std::size_t>(trig)] >= r;
    if (upper)
      as_vec(u, un).noalias() = D1inv * (as_vec(obs, un) - c1 - A1 * as_vec(lags, un));
    else
      as_vec(u, un).noalias() = D2inv * (as_vec(obs, un) - c2 - A2 * as_vec(lags, un));
  };

  std::vector<NamedValue> theta;
  append_matrix(theta, "A1", params.A1);
  append_matrix(theta, "A2", params.A2);
  append_matrix(theta, "D1", params.D1);
  append_matrix(theta, "D2", params.D2);
  append_vector(theta, "c1", c1);
  append_vector(theta, "c2", c2);
  theta.push_back({"threshold", r});

  ModelSpec model("tvar", static_cast<int>(n), 1, std::move(theta), std::move(step), std::move(inv),
                  std::move(innovations));
  return model.with_builder([n, trig](std::span<const double> t) {
    std::size_t pos = 0;
    TvarParams p;
    p.A1 = take_matrix(t, pos, n, n);
    p.A2 = take_matrix(t, pos, n, n);
    p.D1 = take_matrix(t, pos, n, n);
    p.D2 = take_matrix(t, pos, n, n);
    p.c1 = take_vector(t, pos, n);
    p.c2 = take_vector(t, pos, n);
    p.threshold = t[pos];
    p.trigger = trig;
    return make_tvar(p);
  });
}

ModelSpec make_quadratic_example(double a, double b, InnovationKind innovations) {
  StepFn step = [a, b](LagState lags, std::span<const double> u, std::span<double> next) {
    next[0] = a * lags[0] + lags[1] * u[0] * u[0];
    next[1] = b * lags[1] + u[1];
  };
  ModelSpec model("quadratic_example", 2, 1, {{"a", a}, {"b", b}}, std::move(step), std::nullopt,
                  std::move(innovations));
  return model.with_builder([](std::span<const double> t) { return make_quadratic_example(t[0], t[1]); });
}

}  // namespace hfevd
