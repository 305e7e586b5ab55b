#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hfevd/decomposition.hpp"

namespace hfevd {

enum class PolyKind { hermite, laguerre, legendre, jacobi, chebyshev, empirical };

std::string_view to_string(PolyKind kind) noexcept;
PolyKind poly_kind_from_string(std::string_view name);

/// Orthogonal family P_0..P_d under a probability weight. Classical kinds
/// keep textbook leading coefficients; Gram-Schmidt output is monic. The
/// second moments E[P_k^2] are carried explicitly so normalization never
/// depends on the convention.
struct PolyFamily {
  PolyKind kind = PolyKind::hermite;
  double alpha = 0.0;
  double beta = 0.0;
  /// Ascending monomial coefficients of P_k.
  std::vector<std::vector<double>> coefficients;
  std::vector<double> second_moments;

  int max_degree() const noexcept { return static_cast<int>(coefficients.size()) - 1; }
  double evaluate(int k, double x) const;
  void evaluate_all(double x, std::span<double> out) const;
};

/// Hermite (N(0,1)), Laguerre(alpha) (Gamma(alpha+1, 1)), Legendre
/// (Unif[-1,1]), Jacobi(alpha, beta) (weight (1-x)^alpha (1+x)^beta on
/// [-1,1]) and Chebyshev T (arcsine weight). Second moments by Gauss
/// quadrature on the normalized weight.
PolyFamily classical_family(PolyKind kind, int max_degree, double alpha = 0.0, double beta = 0.0);

/// Gauss nodes and weights (summing to 1) of the normalized weight of a
/// classical kind.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_quadrature(PolyKind kind, int points, double alpha = 0.0, double beta = 0.0);

/// Largest condition number accepted for the diagonally scaled Hankel
/// matrix of a moment sequence.
inline constexpr double kHankelConditionLimit = 1e12;

/// Monic family from moments m_0..m_{2d} (m_0 = 1). Throws ortho.moment
/// naming the first degree whose leading Hankel minor is not positive
/// definite or is conditioned beyond kHankelConditionLimit.
PolyFamily gram_schmidt_family(std::span<const double> moments, int max_degree);

/// Hill estimate of the tail index of |x| over the top sqrt(T) order
/// statistics.
double hill_tail_index(std::span<const double> sample);

/// Family from a residual sample (sample moments). Degree k is refused when
/// the estimated tail index does not exceed k, i.e. when E|u|^k is not
/// supported by the data. `max_moment_order` bypasses the tail check.
PolyFamily gram_schmidt_family(std::span<const double> sample, int max_degree,
                               std::optional<int> max_moment_order);

/// Basis over n components, one family each, evaluated on raw innovations.
ProjectionBasis family_basis(const std::vector<PolyFamily>& families);

/// OFEVD: the decomposition pipeline with joint polynomials P_K(u) of the raw
/// innovations, C_K = E[Y P_K] / prod E[P_{k_i}^2].
DecompositionReport ofevd(const ModelSpec& model, const History& history, int h, std::size_t S, std::uint64_t seed,
                          const std::vector<PolyFamily>& families, const Truncation& truncation = {},
                          const std::vector<PartitionSpec>& partitions = {});

}  // namespace hfevd
