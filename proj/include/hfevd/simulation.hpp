#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hfevd/hermite.hpp"
#include "hfevd/model.hpp"

namespace hfevd {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Absolute state bound beyond which a path is declared explosive.
inline constexpr double kExplosionBound = 1e12;

/// S simulated futures from one history. Row s of `eps` holds the n*h
/// standardized innovations of path s in MultiIndex layout (component block
/// outermost); `raw` holds the innovations actually fed to the model and is
/// empty when they coincide with `eps`.
struct SimulationBatch {
  std::size_t S = 0;
  int n = 0;
  int h = 0;
  RowMatrix eps;
  RowMatrix raw;
  RowMatrix terminal;
  History history;
  std::uint64_t seed = 0;
  std::string model_id;

  IndexLayout layout() const noexcept { return {n, h}; }
  /// Innovations driving the model for path s.
  std::span<const double> model_innovations(std::size_t s) const;
};

/// i.i.d. N(0,1), S x (n*h). Row s depends only on (seed, s).
RowMatrix draw_gaussian(std::size_t S, int n, int h, std::uint64_t seed);

/// Resamples each component independently with replacement, S x (n*h).
RowMatrix bootstrap_innovations(const std::vector<EmpiricalDistribution>& residuals, std::size_t S, int h,
                                std::uint64_t seed);

/// Phi^{-1}(rank/(T+1)) applied column block by column block.
RowMatrix pit_normalize(const RowMatrix& raw, const std::vector<EmpiricalDistribution>& residuals, int h);

/// Iterates the model h steps from `lags` (History::flat layout) using one
/// row of innovations in MultiIndex layout. Writes Y_{t+h} into `terminal`.
/// Throws sim.explosion when the state leaves the finite bound.
void propagate(const ModelSpec& model, std::span<const double> lags, std::span<const double> innovations, int h,
               std::span<double> terminal, std::size_t path = 0);

/// Draws (Gaussian or bootstrap according to the model's innovation kind)
/// and propagates S paths.
SimulationBatch simulate_batch(const ModelSpec& model, const History& history, int h, std::size_t S,
                               std::uint64_t seed);

/// Model-driven time series of length T starting after `history`, with raw
/// innovations given row by row (T x n). Row t is Y_{t+1}.
Eigen::MatrixXd iterate_path(const ModelSpec& model, const History& history, const Eigen::MatrixXd& innovations);

/// iterate_path with innovations drawn from the model's innovation kind.
Eigen::MatrixXd simulate_series(const ModelSpec& model, const History& history, std::size_t T, std::uint64_t seed);

/// Flat little-endian dump: "HFVD", u32 version, u64 S, u32 n, u32 h,
/// u64 seed, then eps (S*n*h), terminal (S*n), u32 p and the history (p*n),
/// all as f64 in row-major order.
void write_batch(const std::filesystem::path& path, const SimulationBatch& batch);
SimulationBatch read_batch(const std::filesystem::path& path);

}  // namespace hfevd
