#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hfevd/model.hpp"

namespace hfevd {

enum class ShockKind {
  additive,  // eps_{j,t+1} + delta
  pegged,    // eps_{j,t+1} = delta
  mit,       // eps_{j,t+1} = delta, every other future innovation 0
};

/// Shock on the standardized innovation of one component at t+1. For
/// empirical innovation kinds the shocked value is mapped through F^{-1}(Phi).
struct ShockSpec {
  int component = 0;
  double magnitude = 1.0;
  ShockKind kind = ShockKind::additive;
};

struct IrfEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd se;
};

/// Rows are horizons 1..h, columns components.
struct IrfPath {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd se;
};

/// E[Y_{t+h}(delta) - Y_{t+h} | history] on paired paths; additive shocks.
IrfEstimate eirf(const ModelSpec& model, const History& history, int h, const ShockSpec& shock, std::size_t S,
                 std::uint64_t seed);
/// Same with the shocked innovation pegged to delta.
IrfEstimate girf(const ModelSpec& model, const History& history, int h, const ShockSpec& shock, std::size_t S,
                 std::uint64_t seed);
/// Deterministic: all future innovations 0 except the shocked one, minus
/// the all-zero path.
Eigen::VectorXd mit_irf(const ModelSpec& model, const History& history, int h, const ShockSpec& shock);

/// Responses at every horizon 1..h for the shock's kind (MIT has zero se).
IrfPath irf_path(const ModelSpec& model, const History& history, int h, const ShockSpec& shock, std::size_t S,
                 std::uint64_t seed);

/// Central finite-difference step used when none is given: 1e-2 for k <= 2,
/// 5e-2 for k = 3, 4.
double default_fd_step(int order);

/// E[d^k g / d eps_{j,t+1}^k | history] at horizon 1, averaging central
/// differences over draws of all innovations. Near threshold kinks the
/// difference quotient carries O(1) error within fd_step of the boundary;
/// only the average over draws is meaningful there.
IrfEstimate impact_multiplier(const ModelSpec& model, const History& history, int order, int component,
                              std::size_t S, std::uint64_t seed, std::optional<double> fd_step = std::nullopt);

/// Mixed derivative E[d^{|k|} g / prod_j d eps_j^{k_j}] for a degree vector
/// over the n components at horizon 1.
IrfEstimate cross_multiplier(const ModelSpec& model, const History& history, const std::vector<int>& degrees,
                             std::size_t S, std::uint64_t seed, std::optional<double> fd_step = std::nullopt);

struct MultiplierLink {
  std::vector<int> degrees;
  Eigen::VectorXd multiplier;     // E[d^K g]
  Eigen::VectorXd multiplier_se;
  Eigen::MatrixXd from_multiplier;  // E[d^K g] E[d^K g]' / prod k_j!
  Eigen::VectorXd from_multiplier_se;
  Eigen::MatrixXd hfevd;  // contribution entry of the same index at h = 1
  Eigen::VectorXd hfevd_se;
};

/// Both sides of the derivative/contribution identity at horizon 1 on a
/// common seed. Gaussian innovations only.
MultiplierLink verify_multiplier_link(const ModelSpec& model, const History& history, const std::vector<int>& degrees,
                                      std::size_t S, std::uint64_t seed);

}  // namespace hfevd
