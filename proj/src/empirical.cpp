#include "hfevd/empirical.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "hfevd/error.hpp"

namespace hfevd {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  static const boost::math::normal standard;
  return boost::math::quantile(standard, p);
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> sample) : sorted_(std::move(sample)) {
  if (sorted_.empty()) throw Error("sim", Errc::data, "empirical distribution needs at least one value");
  for (double v : sorted_)
    if (!std::isfinite(v)) throw Error("sim", Errc::data, "empirical distribution contains a non-finite value");
  std::sort(sorted_.begin(), sorted_.end());
  double sum = 0.0;
  for (double v : sorted_) sum += v;
  mean_ = sum / static_cast<double>(sorted_.size());
  double ss = 0.0;
  for (double v : sorted_) ss += (v - mean_) * (v - mean_);
  variance_ = sorted_.size() > 1 ? ss / static_cast<double>(sorted_.size() - 1) : 0.0;
}

std::size_t EmpiricalDistribution::rank(double u) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), u) - sorted_.begin());
}

double EmpiricalDistribution::pit(double u) const {
  const double t = static_cast<double>(sorted_.size());
  double r = static_cast<double>(rank(u));
  if (r < 1.0) r = 0.5;
  return normal_quantile(r / (t + 1.0));
}

double EmpiricalDistribution::quantile(double p) const {
  const double t = static_cast<double>(sorted_.size());
  const double pos = std::clamp(p * (t + 1.0), 1.0, t);  // 1-based rank
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo >= sorted_.size()) return sorted_.back();
  return sorted_[lo - 1] + frac * (sorted_[lo] - sorted_[lo - 1]);
}

}  // namespace hfevd
