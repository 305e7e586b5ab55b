#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hfevd {

/// Degrees above this are rejected; k! stays exact enough in double and
/// the recurrence is well inside its stable range.
inline constexpr int kMaxHermiteDegree = 32;

/// Position of innovation (component, horizon) inside a MultiIndex.
/// Component blocks are outermost: the first h entries belong to
/// component 0 at horizons t+1..t+h, the next h to component 1, etc.
struct IndexLayout {
  int n = 1;  // innovation components
  int h = 1;  // horizons

  int size() const noexcept { return n * h; }
  int position(int component, int horizon) const noexcept { return component * h + horizon; }
  int component_of(int position) const noexcept { return position / h; }
  int horizon_of(int position) const noexcept { return position % h; }
};

/// Degree vector over all n*h future innovations.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> degrees);
  MultiIndex(std::initializer_list<int> degrees);

  /// All-zero index of the given length.
  static MultiIndex zero(std::size_t length);
  /// Single entry of `degree` at `position`.
  static MultiIndex unit(std::size_t length, std::size_t position, int degree = 1);

  std::size_t size() const noexcept { return degrees_.size(); }
  int operator[](std::size_t i) const noexcept { return degrees_[i]; }
  const std::vector<int>& degrees() const noexcept { return degrees_; }

  int total_degree() const noexcept;
  int max_degree() const noexcept;
  int active_count() const noexcept;
  bool is_zero() const noexcept { return active_count() == 0; }

  /// Nonzero (position, degree) pairs in ascending position order.
  std::vector<std::pair<int, int>> active() const;

  /// "1 0 2 0"
  std::string to_string() const;
  /// "e1[t+1]^2*e2[t+2]" style label; "1" for the zero index.
  std::string label(const IndexLayout& layout) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> degrees_;
};

/// k! as a double; k in [0, kMaxHermiteDegree].
double factorial(int k);

/// Probabilists' Hermite polynomial He_k(x) by forward recurrence
/// He_{k+1} = x He_k - k He_{k-1}.
double hermite_eval(int k, double x);

/// Fills out[k] = He_k(x) for k = 0..out.size()-1.
void hermite_eval_all(double x, std::span<double> out);

/// prod_i He_{K_i}(eps_i).
double hermite_eval_joint(const MultiIndex& index, std::span<const double> eps);

/// E[H_K(eps)^2] = prod_i K_i! under independent standard normals.
/// Throws Errc::domain for the zero index.
double hermite_variance(const MultiIndex& index);

/// Monomial coefficients of He_0..He_max. Kept for cross-checks against the
/// recurrence; production paths evaluate by recurrence.
class HermiteTable {
 public:
  explicit HermiteTable(int max_degree);

  int max_degree() const noexcept { return static_cast<int>(rows_.size()) - 1; }
  /// Ascending-power coefficients of He_k.
  const std::vector<double>& coefficients(int k) const { return rows_.at(static_cast<std::size_t>(k)); }
  /// Horner evaluation of the expanded polynomial.
  double evaluate(int k, double x) const;

 private:
  std::vector<std::vector<double>> rows_;
};

}  // namespace hfevd
