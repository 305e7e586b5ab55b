#include "hfevd/hermite.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>

#include "hfevd/error.hpp"

namespace hfevd {

namespace {

void check_degree(int k) {
  if (k < 0 || k > kMaxHermiteDegree) {
    throw Error("hermite", Errc::domain,
                "Hermite degree " + std::to_string(k) + " outside [0, " +
                    std::to_string(kMaxHermiteDegree) + "]");
  }
}

constexpr std::array<double, kMaxHermiteDegree + 1> make_factorials() {
  std::array<double, kMaxHermiteDegree + 1> f{};
  f[0] = 1.0;
  for (int k = 1; k <= kMaxHermiteDegree; ++k) f[k] = f[k - 1] * k;
  return f;
}

constexpr auto kFactorials = make_factorials();

}  // namespace

MultiIndex::MultiIndex(std::vector<int> degrees) : degrees_(std::move(degrees)) {
  for (int d : degrees_) check_degree(d);
}

MultiIndex::MultiIndex(std::initializer_list<int> degrees)
    : MultiIndex(std::vector<int>(degrees)) {}

MultiIndex MultiIndex::zero(std::size_t length) { return MultiIndex(std::vector<int>(length, 0)); }

MultiIndex MultiIndex::unit(std::size_t length, std::size_t position, int degree) {
  std::vector<int> d(length, 0);
  d.at(position) = degree;
  return MultiIndex(std::move(d));
}

int MultiIndex::total_degree() const noexcept {
  return std::accumulate(degrees_.begin(), degrees_.end(), 0);
}

int MultiIndex::max_degree() const noexcept {
  return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

int MultiIndex::active_count() const noexcept {
  return static_cast<int>(std::count_if(degrees_.begin(), degrees_.end(), [](int d) { return d != 0; }));
}

std::vector<std::pair<int, int>> MultiIndex::active() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < degrees_.size(); ++i)
    if (degrees_[i] != 0) out.emplace_back(static_cast<int>(i), degrees_[i]);
  return out;
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < degrees_.size(); ++i) {
    if (i) os << ' ';
    os << degrees_[i];
  }
  return os.str();
}

std::string MultiIndex::label(const IndexLayout& layout) const {
  std::ostringstream os;
  bool first = true;
  for (auto [pos, deg] : active()) {
    if (!first) os << '*';
    first = false;
    os << 'e' << layout.component_of(pos) + 1 << "[t+" << layout.horizon_of(pos) + 1 << ']';
    if (deg != 1) os << '^' << deg;
  }
  if (first) os << '1';
  return os.str();
}

double factorial(int k) {
  check_degree(k);
  return kFactorials[static_cast<std::size_t>(k)];
}

double hermite_eval(int k, double x) {
  check_degree(k);
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int j = 1; j < k; ++j) {
    const double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void hermite_eval_all(double x, std::span<double> out) {
  if (out.empty()) return;
  check_degree(static_cast<int>(out.size()) - 1);
  out[0] = 1.0;
  if (out.size() > 1) out[1] = x;
  for (std::size_t j = 1; j + 1 < out.size(); ++j)
    out[j + 1] = x * out[j] - static_cast<double>(j) * out[j - 1];
}

double hermite_eval_joint(const MultiIndex& index, std::span<const double> eps) {
  if (eps.size() != index.size()) {
    throw Error("hermite", Errc::dimension,
                "innovation vector has length " + std::to_string(eps.size()) +
                    ", index has length " + std::to_string(index.size()));
  }
  double prod = 1.0;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (index[i] != 0) prod *= hermite_eval(index[i], eps[i]);
  return prod;
}

double hermite_variance(const MultiIndex& index) {
  if (index.is_zero())
    throw Error("hermite", Errc::domain, "variance of the zero index is excluded from every sum");
  double v = 1.0;
  for (int d : index.degrees()) v *= factorial(d);
  return v;
}

HermiteTable::HermiteTable(int max_degree) {
  check_degree(max_degree);
  rows_.resize(static_cast<std::size_t>(max_degree) + 1);
  rows_[0] = {1.0};
  if (max_degree >= 1) rows_[1] = {0.0, 1.0};
  for (int k = 1; k < max_degree; ++k) {
    const auto& cur = rows_[static_cast<std::size_t>(k)];
    const auto& prev = rows_[static_cast<std::size_t>(k - 1)];
    std::vector<double> next(static_cast<std::size_t>(k) + 2, 0.0);
    for (std::size_t p = 0; p < cur.size(); ++p) next[p + 1] += cur[p];
    for (std::size_t p = 0; p < prev.size(); ++p) next[p] -= k * prev[p];
    rows_[static_cast<std::size_t>(k) + 1] = std::move(next);
  }
}

double HermiteTable::evaluate(int k, double x) const {
  const auto& c = coefficients(k);
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace hfevd
