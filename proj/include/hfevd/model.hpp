#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hfevd/empirical.hpp"

namespace hfevd {

/// Most recent p observations, most-recent-first: row 0 is Y_t, row 1 is
/// Y_{t-1}, and so on.
class History {
 public:
  History() = default;
  /// Throws Errc::data on non-finite entries.
  explicit History(Eigen::MatrixXd lags);
  /// Single-lag history from one observation.
  static History from_row(const Eigen::VectorXd& y);

  int lags() const noexcept { return static_cast<int>(lags_.rows()); }
  int dimension() const noexcept { return static_cast<int>(lags_.cols()); }
  const Eigen::MatrixXd& matrix() const noexcept { return lags_; }

  /// Row-major, most-recent-first copy: entry (lag l, component c) at l*n + c.
  std::vector<double> flat() const;

 private:
  Eigen::MatrixXd lags_;
};

/// Flat lag state as consumed by step functions (layout as History::flat).
using LagState = std::span<const double>;

/// Writes Y_t given the lag state and the innovation vector u_t.
using StepFn = std::function<void(LagState lags, std::span<const double> innovation, std::span<double> next)>;
/// Writes u_t given Y_t and the lag state it was generated from.
using InverseFn = std::function<void(std::span<const double> observation, LagState lags, std::span<double> innovation)>;

/// How raw innovations u_t relate to the standard Gaussian eps_t on which
/// decompositions and shocks are defined.
class InnovationKind {
 public:
  /// u = eps.
  static InnovationKind gaussian();
  /// u_j = F_j^{-1}(Phi(eps_j)) with F_j the empirical cdf of component j.
  static InnovationKind empirical(std::vector<EmpiricalDistribution> components);

  bool is_gaussian() const noexcept { return components_ == nullptr; }
  const std::vector<EmpiricalDistribution>& distributions() const;

  double to_raw(int component, double eps) const;
  double to_gaussian(int component, double u) const;

 private:
  std::shared_ptr<const std::vector<EmpiricalDistribution>> components_;
};

struct NamedValue {
  std::string name;
  double value = 0.0;
};

class ModelSpec;
/// Rebuilds a model of the same family from a new parameter vector.
using ModelBuilder = std::function<ModelSpec(std::span<const double> theta)>;

/// Nonlinear SVAR(p): Y_t = g(Y_{t-1..t-p}, u_t). Immutable; step and
/// inverse are pure and reentrant.
class ModelSpec {
 public:
  ModelSpec(std::string name, int dimension, int lags, std::vector<NamedValue> theta, StepFn step,
            std::optional<InverseFn> inverse = std::nullopt, InnovationKind innovations = InnovationKind::gaussian());

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return n_; }
  int lags() const noexcept { return p_; }
  const std::vector<NamedValue>& theta() const noexcept { return theta_; }
  std::vector<double> theta_values() const;
  const InnovationKind& innovations() const noexcept { return innovations_; }
  bool has_inverse() const noexcept { return inverse_.has_value(); }
  /// Non-fatal construction diagnostics (e.g. spectral radius >= 1).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  void step(LagState lags, std::span<const double> innovation, std::span<double> next) const {
    step_(lags, innovation, next);
  }
  void inverse(std::span<const double> observation, LagState lags, std::span<double> innovation) const;

  Eigen::VectorXd step(const History& history, const Eigen::VectorXd& innovation) const;
  Eigen::VectorXd inverse(const Eigen::VectorXd& observation, const History& history) const;

  /// Same dynamics with a different innovation kind.
  ModelSpec with_innovations(InnovationKind innovations) const;
  /// Same family at parameter vector `theta`. Throws Errc::capability
  /// when the model was built without a builder.
  ModelSpec with_theta(std::span<const double> theta) const;
  ModelSpec with_builder(ModelBuilder builder) const;
  ModelSpec with_warning(std::string warning) const;
  bool has_builder() const noexcept { return static_cast<bool>(builder_); }

  /// Shifts the lag window: new state = (next, lags without the oldest row).
  static void advance(std::span<double> lags, std::span<const double> next);

 private:
  std::string name_;
  int n_ = 0;
  int p_ = 0;
  std::vector<NamedValue> theta_;
  StepFn step_;
  std::optional<InverseFn> inverse_;
  InnovationKind innovations_;
  ModelBuilder builder_;
  std::vector<std::string> warnings_;
};

/// Checks that `history` has the model's dimension and lag order.
void check_history(const ModelSpec& model, const History& history);

}  // namespace hfevd
