#include "hfevd/ortho_poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hfevd/error.hpp"

namespace hfevd {

namespace {

// Monic three-term recurrence p_{k+1} = (x - a_k) p_k - b_k p_{k-1} of the
// normalized weight; b_0 is unused.
struct Recurrence {
  std::vector<double> a;
  std::vector<double> b;
};

Recurrence recurrence(PolyKind kind, int count, double alpha, double beta) {
  Recurrence r;
  r.a.assign(static_cast<std::size_t>(count), 0.0);
  r.b.assign(static_cast<std::size_t>(count), 0.0);
  for (int k = 0; k < count; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const double kd = k;
    switch (kind) {
      case PolyKind::hermite:
        r.b[uk] = kd;
        break;
      case PolyKind::laguerre:
        r.a[uk] = 2.0 * kd + alpha + 1.0;
        r.b[uk] = kd * (kd + alpha);
        break;
      case PolyKind::legendre:
        r.b[uk] = kd * kd / (4.0 * kd * kd - 1.0);
        break;
      case PolyKind::chebyshev:
        r.b[uk] = k == 1 ? 0.5 : 0.25;
        break;
      case PolyKind::jacobi: {
        const double ab = alpha + beta;
        if (k == 0) {
          r.a[uk] = (beta - alpha) / (ab + 2.0);
        } else {
          const double s = 2.0 * kd + ab;
          r.a[uk] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
          if (k == 1)
            r.b[uk] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
          else
            r.b[uk] = 4.0 * kd * (kd + alpha) * (kd + beta) * (kd + ab) / (s * s * (s + 1.0) * (s - 1.0));
        }
        break;
      }
      case PolyKind::empirical:
        throw Error("ortho", Errc::parameter, "empirical families come from Gram-Schmidt, not a recurrence");
    }
  }
  if (kind == PolyKind::chebyshev && count > 0) r.b[0] = 0.0;
  return r;
}

double leading_coefficient(PolyKind kind, int k, double alpha, double beta) {
  if (k == 0) return 1.0;
  const double kd = k;
  switch (kind) {
    case PolyKind::laguerre: return (k % 2 ? -1.0 : 1.0) / std::tgamma(kd + 1.0);
    case PolyKind::legendre: return std::exp(std::lgamma(2.0 * kd + 1.0) - kd * std::log(2.0) - 2.0 * std::lgamma(kd + 1.0));
    case PolyKind::chebyshev: return std::ldexp(1.0, k - 1);
    case PolyKind::jacobi: {
      const double ab = alpha + beta;
      return std::exp(std::lgamma(2.0 * kd + ab + 1.0) - kd * std::log(2.0) - std::lgamma(kd + 1.0) -
                      std::lgamma(kd + ab + 1.0));
    }
    default: return 1.0;
  }
}

void check_parameters(PolyKind kind, double alpha, double beta) {
  if (kind == PolyKind::laguerre && !(alpha > -1.0))
    throw Error("ortho", Errc::parameter, "Laguerre needs alpha > -1");
  if (kind == PolyKind::jacobi && !(alpha > -1.0 && beta > -1.0))
    throw Error("ortho", Errc::parameter, "Jacobi needs alpha > -1 and beta > -1");
}

std::vector<std::vector<double>> monic_rows(const Recurrence& r, int max_degree) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(max_degree + 1));
  rows[0] = {1.0};
  for (int k = 0; k < max_degree; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    std::vector<double> next(uk + 2, 0.0);
    for (std::size_t i = 0; i <= uk; ++i) {
      next[i + 1] += rows[uk][i];
      next[i] -= r.a[uk] * rows[uk][i];
    }
    if (k > 0)
      for (std::size_t i = 0; i < rows[uk - 1].size(); ++i) next[i] -= r.b[uk] * rows[uk - 1][i];
    rows[uk + 1] = std::move(next);
  }
  return rows;
}

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

}  // namespace

std::string_view to_string(PolyKind kind) noexcept {
  switch (kind) {
    case PolyKind::hermite: return "hermite";
    case PolyKind::laguerre: return "laguerre";
    case PolyKind::legendre: return "legendre";
    case PolyKind::jacobi: return "jacobi";
    case PolyKind::chebyshev: return "chebyshev";
    case PolyKind::empirical: return "empirical";
  }
  return "unknown";
}

PolyKind poly_kind_from_string(std::string_view name) {
  for (auto k : {PolyKind::hermite, PolyKind::laguerre, PolyKind::legendre, PolyKind::jacobi, PolyKind::chebyshev,
                 PolyKind::empirical})
    if (to_string(k) == name) return k;
  throw Error("ortho", Errc::parameter, "unknown polynomial family '" + std::string(name) + "'");
}

double PolyFamily::evaluate(int k, double x) const { return horner(coefficients.at(static_cast<std::size_t>(k)), x); }

void PolyFamily::evaluate_all(double x, std::span<double> out) const {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = horner(coefficients.at(k), x);
}

Quadrature gauss_quadrature(PolyKind kind, int points, double alpha, double beta) {
  check_parameters(kind, alpha, beta);
  if (points < 1) throw Error("ortho", Errc::parameter, "quadrature needs at least one point");
  const auto r = recurrence(kind, points, alpha, beta);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(points, points);
  for (int k = 0; k < points; ++k) {
    J(k, k) = r.a[static_cast<std::size_t>(k)];
    if (k + 1 < points) J(k, k + 1) = J(k + 1, k) = std::sqrt(r.b[static_cast<std::size_t>(k + 1)]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Quadrature q;
  for (int i = 0; i < points; ++i) {
    q.nodes.push_back(es.eigenvalues()(i));
    q.weights.push_back(es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
  }
  return q;
}

PolyFamily classical_family(PolyKind kind, int max_degree, double alpha, double beta) {
  if (max_degree < 1) throw Error("ortho", Errc::parameter, "max_degree must be >= 1");
  check_parameters(kind, alpha, beta);
  if (kind == PolyKind::legendre) alpha = beta = 0.0;
  if (kind == PolyKind::chebyshev) alpha = beta = -0.5;
  const auto r = recurrence(kind, max_degree + 1, alpha, beta);
  auto rows = monic_rows(r, max_degree);

  PolyFamily f;
  f.kind = kind;
  f.alpha = alpha;
  f.beta = beta;
  const auto q = gauss_quadrature(kind, max_degree + 1, alpha, beta);
  for (int k = 0; k <= max_degree; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    double v = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double p = horner(rows[uk], q.nodes[i]);
      v += q.weights[i] * p * p;
    }
    const double lead = leading_coefficient(kind, k, alpha, beta);
    for (double& c : rows[uk]) c *= lead;
    f.second_moments.push_back(v * lead * lead);
  }
  f.coefficients = std::move(rows);
  return f;
}

PolyFamily gram_schmidt_family(std::span<const double> moments, int max_degree) {
  if (max_degree < 1) throw Error("ortho", Errc::parameter, "max_degree must be >= 1");
  const auto d = static_cast<std::size_t>(max_degree);
  if (moments.size() < 2 * d + 1)
    throw Error("ortho", Errc::moment, "degree " + std::to_string(max_degree) + " needs moments m_0..m_" +
                                           std::to_string(2 * max_degree));
  if (std::abs(moments[0] - 1.0) > 1e-12) throw Error("ortho", Errc::moment, "m_0 must equal 1");
  for (std::size_t i = 0; i <= 2 * d; ++i)
    if (!std::isfinite(moments[i])) throw Error("ortho", Errc::moment, "moment m_" + std::to_string(i) + " is not finite");

  const auto N = static_cast<Eigen::Index>(d + 1);
  Eigen::MatrixXd H(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) H(i, j) = moments[static_cast<std::size_t>(i + j)];

  for (Eigen::Index k = 1; k < N; ++k) {
    const Eigen::MatrixXd block = H.topLeftCorner(k + 1, k + 1);
    const Eigen::VectorXd scale = block.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = scale.asDiagonal() * block * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || !std::isfinite(hi)) {
      throw Error("ortho", Errc::moment,
                  "degree " + std::to_string(k) + ": Hankel moment matrix is not positive definite");
    }
    if (hi / lo > kHankelConditionLimit) {
      std::ostringstream os;
      os << "degree " << k << ": Hankel moment matrix condition number " << hi / lo << " exceeds 1e12";
      throw Error("ortho", Errc::moment, os.str());
    }
  }

  // Modified Gram-Schmidt of the monomials under <p, q> = p' H q.
  std::vector<Eigen::VectorXd> p;
  PolyFamily f;
  f.kind = PolyKind::empirical;
  for (Eigen::Index k = 0; k < N; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(N, k);
    for (const auto& q : p) v -= (v.dot(H * q) / q.dot(H * q)) * q;
    const double norm = v.dot(H * v);
    if (!(norm > 0.0))
      throw Error("ortho", Errc::moment, "degree " + std::to_string(k) + ": polynomial has nonpositive variance");
    f.second_moments.push_back(norm);
    f.coefficients.emplace_back(v.data(), v.data() + k + 1);
    p.push_back(std::move(v));
  }
  return f;
}

double hill_tail_index(std::span<const double> sample) {
  if (sample.size() < 16) throw Error("ortho", Errc::data, "tail index needs at least 16 observations");
  std::vector<double> a(sample.size());
  std::transform(sample.begin(), sample.end(), a.begin(), [](double x) { return std::abs(x); });
  const auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(a.size())));
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end(), std::greater<>());
  const double threshold = a[k];
  if (!(threshold > 0.0)) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(a[i] / threshold);
  return s > 0.0 ? static_cast<double>(k) / s : std::numeric_limits<double>::infinity();
}

PolyFamily gram_schmidt_family(std::span<const double> sample, int max_degree, std::optional<int> max_moment_order) {
  if (max_degree < 1) throw Error("ortho", Errc::parameter, "max_degree must be >= 1");
  if (sample.size() < 2) throw Error("ortho", Errc::data, "sample needs at least two values");
  if (max_moment_order) {
    if (max_degree > *max_moment_order)
      throw Error("ortho", Errc::moment,
                  "degree " + std::to_string(*max_moment_order + 1) + " exceeds the allowed moment order " +
                      std::to_string(*max_moment_order));
  } else {
    const double alpha = hill_tail_index(sample);
    for (int k = 1; k <= max_degree; ++k) {
      if (alpha <= k) {
        std::ostringstream os;
        os << "degree " << k << ": estimated tail index " << alpha << " does not support moments of order " << k;
        throw Error("ortho", Errc::moment, os.str());
      }
    }
  }
  std::vector<double> moments(static_cast<std::size_t>(2 * max_degree + 1), 0.0);
  for (double x : sample) {
    double p = 1.0;
    for (double& m : moments) {
      m += p;
      p *= x;
    }
  }
  for (double& m : moments) m /= static_cast<double>(sample.size());
  return gram_schmidt_family(moments, max_degree);
}

ProjectionBasis family_basis(const std::vector<PolyFamily>& families) {
  if (families.empty()) throw Error("ortho", Errc::spec, "no polynomial families given");
  ProjectionBasis b;
  b.name = "orthogonal";
  b.max_degree = families.front().max_degree();
  for (const auto& f : families) {
    b.max_degree = std::min(b.max_degree, f.max_degree());
    for (std::size_t k = 0; k < f.second_moments.size(); ++k)
      if (!(f.second_moments[k] > 0.0))
        throw Error("ortho", Errc::spec, "family has nonpositive second moment at degree " + std::to_string(k));
    b.second_moments.push_back(f.second_moments);
  }
  b.evaluate = [families](int component, double x, std::span<double> out) {
    families[static_cast<std::size_t>(component)].evaluate_all(x, out);
  };
  b.raw_inputs = true;
  return b;
}

DecompositionReport ofevd(const ModelSpec& model, const History& history, int h, std::size_t S, std::uint64_t seed,
                          const std::vector<PolyFamily>& families, const Truncation& truncation,
                          const std::vector<PartitionSpec>& partitions) {
  if (static_cast<int>(families.size()) != model.dimension())
    throw Error("ortho", Errc::spec, "OFEVD needs one polynomial family per component");
  for (std::size_t j = 0; j < families.size(); ++j)
    if (families[j].max_degree() < truncation.max_total_degree)
      throw Error("ortho", Errc::spec,
                  "family of component " + std::to_string(j + 1) + " has degree " +
                      std::to_string(families[j].max_degree()) + " < truncation degree " +
                      std::to_string(truncation.max_total_degree));
  auto basis = family_basis(families);
  basis.max_degree = truncation.max_total_degree;
  const auto batch = simulate_batch(model, history, h, S, seed);
  const auto indices = enumerate_indices(model.dimension(), h, truncation.max_total_degree, truncation.max_active);
  auto report = decompose_batch(batch, indices, partitions, basis);
  report.metadata.theta = model.theta();
  std::ostringstream os;
  os << "total degree <= " << truncation.max_total_degree << ", active entries <= " << truncation.max_active;
  report.metadata.index_set = os.str();
  report.warnings.insert(report.warnings.begin(), model.warnings().begin(), model.warnings().end());
  return report;
}

}  // namespace hfevd
