#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hfevd/hermite.hpp"
#include "hfevd/model.hpp"
#include "hfevd/simulation.hpp"

namespace hfevd {

struct Truncation {
  int max_total_degree = 5;
  int max_active = 2;
};

/// All K with 1 <= |K| <= max_total_degree and at most max_active nonzero
/// entries. Ordered by total degree, then lexicographically descending, so
/// (1,0) precedes (0,1).
std::vector<MultiIndex> enumerate_indices(int n, int h, int max_total_degree, int max_active);

struct CoefficientEstimate {
  Eigen::VectorXd coeff;
  Eigen::VectorXd se;
};

/// C_K = (1/S) sum_s Y_s H_K(eps_s) / prod k_i!, with per-component MC
/// standard errors. Throws hermite.domain for the zero index.
CoefficientEstimate estimate_coefficient(const SimulationBatch& batch, const MultiIndex& index);
/// Same estimator for many indices in one pass over the batch.
std::vector<CoefficientEstimate> estimate_coefficients(const SimulationBatch& batch,
                                                       const std::vector<MultiIndex>& indices);

struct ContributionEntry {
  MultiIndex index;
  Eigen::VectorXd coeff;
  Eigen::VectorXd coeff_se;
  Eigen::MatrixXd matrix;     // coeff coeff' * norm
  Eigen::VectorXd matrix_se;  // diagonal only
  Eigen::VectorXd share;      // diag(matrix) / diag(total); empty when degenerate
};

/// matrix = coeff coeff' * prod k_i!.
ContributionEntry variance_contribution(const Eigen::VectorXd& coeff, const MultiIndex& index);

/// Unbiased sample covariance of the terminal rows. Requires S >= 2.
Eigen::MatrixXd total_conditional_variance(const SimulationBatch& batch);

namespace select {
struct Linear {};
/// |K| >= 2.
struct Nonlinear {};
/// Nonzero only inside component j's block; max_degree 0 means unbounded.
struct Marginal {
  int component = 0;
  int max_degree = 0;
};
/// A single active entry of the given degree on component j, at one horizon
/// or at any horizon.
struct Specific {
  int component = 0;
  std::optional<int> horizon;
  int degree = 1;
};
/// Nonzero inside block j and somewhere outside it.
struct JointInteraction {
  int component = 0;
};
/// Marginal(j) united with JointInteraction(j).
struct IsakinNgo {
  int component = 0;
};
/// Exactly two active entries: degree k1 on component j1 at horizon i + lag
/// and degree k2 on component j2 at horizon i, for every admissible i.
struct Interaction {
  int component1 = 0;
  int degree1 = 1;
  int component2 = 1;
  int degree2 = 1;
  int lag = 0;
};
struct Explicit {
  std::vector<MultiIndex> indices;
};
}  // namespace select

using Selector = std::variant<select::Linear, select::Nonlinear, select::Marginal, select::Specific,
                              select::JointInteraction, select::IsakinNgo, select::Interaction, select::Explicit>;

struct PartitionSpec {
  std::string name;
  Selector selector;
};

/// Positions in `indices` selected by `spec`. Components and horizons are
/// 0-based. Throws hfevd.spec on an out-of-range component or horizon.
std::vector<std::size_t> partition_select(const PartitionSpec& spec, const std::vector<MultiIndex>& indices,
                                          const IndexLayout& layout);

struct PartitionAggregate {
  std::string name;
  std::vector<std::size_t> members;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd se;  // diagonal, influence-function based
  Eigen::VectorXd share;
};

struct ReportMetadata {
  std::string model_id;
  std::vector<NamedValue> theta;
  Eigen::MatrixXd history;
  int h = 0;
  std::size_t S = 0;
  std::uint64_t seed = 0;
  std::string basis = "hermite";
  std::string index_set;
};

struct DecompositionReport {
  ReportMetadata metadata;
  Eigen::MatrixXd total;
  Eigen::VectorXd total_se;  // diagonal
  std::vector<ContributionEntry> entries;
  Eigen::MatrixXd residual;
  double residual_trace_se = 0.0;
  /// trace(total) < 1e-14: shares are omitted.
  bool degenerate = false;
  std::vector<PartitionAggregate> partitions;
  std::vector<std::string> warnings;

  const ContributionEntry* find(const MultiIndex& index) const;
  const PartitionAggregate* partition(const std::string& name) const;
};

/// Univariate polynomial basis per innovation component: fills values of
/// P_0..P_d at x, and the second moments E[P_k^2].
struct ProjectionBasis {
  std::string name;
  int max_degree = 0;
  std::function<void(int component, double x, std::span<double> out)> evaluate;
  std::vector<std::vector<double>> second_moments;  // [component][degree]
  /// Use the raw innovations (true) or the standardized Gaussian ones.
  bool raw_inputs = false;
};

/// Hermite basis on the standardized innovations.
ProjectionBasis hermite_basis(int n, int max_degree);

/// Projection of the terminal values on the basis polynomials indexed by
/// `indices`, with partition aggregates and standard errors.
DecompositionReport decompose_batch(const SimulationBatch& batch, const std::vector<MultiIndex>& indices,
                                    const std::vector<PartitionSpec>& partitions, const ProjectionBasis& basis);

/// simulate_batch + decompose_batch with the Hermite basis.
DecompositionReport decompose(const ModelSpec& model, const History& history, int h, std::size_t S,
                              std::uint64_t seed, const Truncation& truncation = {},
                              const std::vector<PartitionSpec>& partitions = {});

struct NestedEstimate {
  Eigen::MatrixXd value;
  Eigen::VectorXd se;  // diagonal
};

/// E[V(Y_{t+h} | innovations of all components except j)] by nested Monte
/// Carlo: S_outer draws of the other components, S_inner draws of j each.
NestedEstimate isakin_ngo_direct(const ModelSpec& model, const History& history, int h, int component,
                                 std::size_t S_outer, std::size_t S_inner, std::uint64_t seed);

}  // namespace hfevd
