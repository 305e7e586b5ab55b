#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hfevd {

/// Standard normal cdf and quantile.
double normal_cdf(double x);
double normal_quantile(double p);

/// Sorted residual sample of one innovation component.
class EmpiricalDistribution {
 public:
  /// Throws Errc::data on an empty or non-finite sample.
  explicit EmpiricalDistribution(std::vector<double> sample);

  std::size_t size() const noexcept { return sorted_.size(); }
  std::span<const double> sorted() const noexcept { return sorted_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }

  /// Number of sample values <= u.
  std::size_t rank(double u) const noexcept;

  /// Phi^{-1}(rank(u)/(T+1)). Values below the sample minimum use rank 1/2
  /// so the result stays finite.
  double pit(double u) const;

  /// Inverse of the rank/(T+1) map, linear between order statistics and
  /// clamped to the sample range. quantile(pit-probability of x_(r)) == x_(r).
  double quantile(double p) const;

  /// Gaussian-form mapping F^{-1}(Phi(eps)).
  double from_gaussian(double eps) const { return quantile(normal_cdf(eps)); }

 private:
  std::vector<double> sorted_;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

}  // namespace hfevd
