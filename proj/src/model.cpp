#include "hfevd/model.hpp"

#include <algorithm>
#include <cmath>

#include "hfevd/error.hpp"

namespace hfevd {

History::History(Eigen::MatrixXd lags) : lags_(std::move(lags)) {
  if (!lags_.allFinite()) throw Error("model", Errc::data, "history contains non-finite entries");
}

History History::from_row(const Eigen::VectorXd& y) { return History(Eigen::MatrixXd(y.transpose())); }

std::vector<double> History::flat() const {
  std::vector<double> out(static_cast<std::size_t>(lags_.size()));
  const auto n = lags_.cols();
  for (Eigen::Index l = 0; l < lags_.rows(); ++l)
    for (Eigen::Index c = 0; c < n; ++c) out[static_cast<std::size_t>(l * n + c)] = lags_(l, c);
  return out;
}

InnovationKind InnovationKind::gaussian() { return {}; }

InnovationKind InnovationKind::empirical(std::vector<EmpiricalDistribution> components) {
  InnovationKind k;
  k.components_ = std::make_shared<const std::vector<EmpiricalDistribution>>(std::move(components));
  return k;
}

const std::vector<EmpiricalDistribution>& InnovationKind::distributions() const {
  if (!components_) throw Error("model", Errc::capability, "gaussian innovations carry no empirical distribution");
  return *components_;
}

double InnovationKind::to_raw(int component, double eps) const {
  if (!components_) return eps;
  return components_->at(static_cast<std::size_t>(component)).from_gaussian(eps);
}

double InnovationKind::to_gaussian(int component, double u) const {
  if (!components_) return u;
  return components_->at(static_cast<std::size_t>(component)).pit(u);
}

ModelSpec::ModelSpec(std::string name, int dimension, int lags, std::vector<NamedValue> theta, StepFn step,
                     std::optional<InverseFn> inverse, InnovationKind innovations)
    : name_(std::move(name)),
      n_(dimension),
      p_(lags),
      theta_(std::move(theta)),
      step_(std::move(step)),
      inverse_(std::move(inverse)),
      innovations_(std::move(innovations)) {
  if (n_ < 1 || p_ < 1) throw Error("model", Errc::construction, "model dimension and lag order must be >= 1");
  if (!step_) throw Error("model", Errc::construction, "model has no step function");
  if (!innovations_.is_gaussian() && static_cast<int>(innovations_.distributions().size()) != n_)
    throw Error("model", Errc::construction, "empirical innovations need one distribution per component");
}

std::vector<double> ModelSpec::theta_values() const {
  std::vector<double> v;
  v.reserve(theta_.size());
  for (const auto& t : theta_) v.push_back(t.value);
  return v;
}

void ModelSpec::inverse(std::span<const double> observation, LagState lags, std::span<double> innovation) const {
  if (!inverse_) throw Error("model", Errc::capability, "model '" + name_ + "' has no inverse");
  (*inverse_)(observation, lags, innovation);
}

Eigen::VectorXd ModelSpec::step(const History& history, const Eigen::VectorXd& innovation) const {
  check_history(*this, history);
  if (innovation.size() != n_) throw Error("model", Errc::dimension, "innovation length differs from model dimension");
  const auto lags = history.flat();
  Eigen::VectorXd next(n_);
  step_(lags, std::span<const double>(innovation.data(), static_cast<std::size_t>(n_)),
        std::span<double>(next.data(), static_cast<std::size_t>(n_)));
  return next;
}

Eigen::VectorXd ModelSpec::inverse(const Eigen::VectorXd& observation, const History& history) const {
  check_history(*this, history);
  if (observation.size() != n_) throw Error("model", Errc::dimension, "observation length differs from model dimension");
  const auto lags = history.flat();
  Eigen::VectorXd eps(n_);
  inverse(std::span<const double>(observation.data(), static_cast<std::size_t>(n_)), lags,
          std::span<double>(eps.data(), static_cast<std::size_t>(n_)));
  return eps;
}

ModelSpec ModelSpec::with_innovations(InnovationKind innovations) const {
  ModelSpec copy = *this;
  if (!innovations.is_gaussian() && static_cast<int>(innovations.distributions().size()) != n_)
    throw Error("model", Errc::construction, "empirical innovations need one distribution per component");
  copy.innovations_ = std::move(innovations);
  return copy;
}

ModelSpec ModelSpec::with_theta(std::span<const double> theta) const {
  if (!builder_) throw Error("model", Errc::capability, "model '" + name_ + "' cannot be rebuilt from parameters");
  if (theta.size() != theta_.size()) throw Error("model", Errc::dimension, "parameter vector has the wrong length");
  return builder_(theta).with_innovations(innovations_);
}

ModelSpec ModelSpec::with_builder(ModelBuilder builder) const {
  ModelSpec copy = *this;
  copy.builder_ = std::move(builder);
  return copy;
}

ModelSpec ModelSpec::with_warning(std::string warning) const {
  ModelSpec copy = *this;
  copy.warnings_.push_back(std::move(warning));
  return copy;
}

void ModelSpec::advance(std::span<double> lags, std::span<const double> next) {
  const std::size_t n = next.size();
  if (lags.size() > n) std::copy_backward(lags.begin(), lags.end() - static_cast<std::ptrdiff_t>(n), lags.end());
  std::copy(next.begin(), next.end(), lags.begin());
}

void check_history(const ModelSpec& model, const History& history) {
  if (history.dimension() != model.dimension() || history.lags() != model.lags()) {
    throw Error("model", Errc::dimension,
                "history is " + std::to_string(history.lags()) + "x" + std::to_string(history.dimension()) +
                    ", model '" + model.name() + "' needs " + std::to_string(model.lags()) + "x" +
                    std::to_string(model.dimension()));
  }
}

}  // namespace hfevd
