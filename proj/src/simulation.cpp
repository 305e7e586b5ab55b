#include "hfevd/simulation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "hfevd/error.hpp"
#include "hfevd/parallel.hpp"
#include "hfevd/rng.hpp"

namespace hfevd {

std::span<const double> SimulationBatch::model_innovations(std::size_t s) const {
  const auto& m = raw.size() ? raw : eps;
  const auto cols = static_cast<std::size_t>(m.cols());
  return {m.data() + s * cols, cols};
}

RowMatrix draw_gaussian(std::size_t S, int n, int h, std::uint64_t seed) {
  if (S < 1) throw Error("sim", Errc::parameter, "path count S must be >= 1");
  if (n < 1 || h < 1) throw Error("sim", Errc::parameter, "dimension and horizon must be >= 1");
  const auto cols = static_cast<Eigen::Index>(n) * h;
  RowMatrix eps(static_cast<Eigen::Index>(S), cols);
  parallel_chunks(S, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      PathRng rng(seed, StreamTag::gaussian, s);
      std::normal_distribution<double> normal;
      double* row = eps.data() + s * static_cast<std::size_t>(cols);
      for (Eigen::Index c = 0; c < cols; ++c) row[c] = normal(rng);
    }
  });
  return eps;
}

RowMatrix bootstrap_innovations(const std::vector<EmpiricalDistribution>& residuals, std::size_t S, int h,
                                std::uint64_t seed) {
  if (S < 1) throw Error("sim", Errc::parameter, "path count S must be >= 1");
  if (residuals.empty()) throw Error("sim", Errc::data, "bootstrap needs at least one residual component");
  for (const auto& r : residuals)
    if (r.size() == 0) throw Error("sim", Errc::data, "empty residual sample");
  const int n = static_cast<int>(residuals.size());
  const auto cols = static_cast<std::size_t>(n) * static_cast<std::size_t>(h);
  RowMatrix raw(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(cols));
  parallel_chunks(S, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      PathRng rng(seed, StreamTag::bootstrap, s);
      double* row = raw.data() + s * cols;
      for (int j = 0; j < n; ++j) {
        const auto sample = residuals[static_cast<std::size_t>(j)].sorted();
        std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
        for (int i = 0; i < h; ++i) row[j * h + i] = sample[pick(rng)];
      }
    }
  });
  return raw;
}

RowMatrix pit_normalize(const RowMatrix& raw, const std::vector<EmpiricalDistribution>& residuals, int h) {
  if (raw.cols() != static_cast<Eigen::Index>(residuals.size()) * h)
    throw Error("sim", Errc::dimension, "raw draw width differs from n*h");
  RowMatrix eps(raw.rows(), raw.cols());
  parallel_chunks(static_cast<std::size_t>(raw.rows()), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (auto s = static_cast<Eigen::Index>(begin); s < static_cast<Eigen::Index>(end); ++s)
      for (Eigen::Index c = 0; c < raw.cols(); ++c)
        eps(s, c) = residuals[static_cast<std::size_t>(c / h)].pit(raw(s, c));
  });
  return eps;
}

void propagate(const ModelSpec& model, std::span<const double> lags, std::span<const double> innovations, int h,
               std::span<double> terminal, std::size_t path) {
  const auto n = static_cast<std::size_t>(model.dimension());
  std::array<double, 16> small_state{};
  std::vector<double> big_state;
  std::span<double> state;
  // lag window + innovation + next
  const std::size_t need = lags.size() + 2 * n;
  if (need <= small_state.size()) {
    state = std::span<double>(small_state.data(), need);
  } else {
    big_state.resize(need);
    state = big_state;
  }
  auto window = state.subspan(0, lags.size());
  auto u = state.subspan(lags.size(), n);
  auto next = state.subspan(lags.size() + n, n);
  std::copy(lags.begin(), lags.end(), window.begin());

  for (int i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < n; ++j) u[j] = innovations[j * static_cast<std::size_t>(h) + static_cast<std::size_t>(i)];
    model.step(window, u, next);
    for (double v : next) {
      if (!std::isfinite(v) || std::abs(v) > kExplosionBound) {
        throw Error("sim", Errc::explosion,
                    "path " + std::to_string(path) + " exploded at step " + std::to_string(i + 1) +
                        " (|state| > 1e12 or non-finite)");
      }
    }
    ModelSpec::advance(window, next);
  }
  std::copy(next.begin(), next.end(), terminal.begin());
}

SimulationBatch simulate_batch(const ModelSpec& model, const History& history, int h, std::size_t S,
                               std::uint64_t seed) {
  check_history(model, history);
  if (h < 1) throw Error("sim", Errc::parameter, "horizon h must be >= 1");
  if (S < 1) throw Error("sim", Errc::parameter, "path count S must be >= 1");

  SimulationBatch batch;
  batch.S = S;
  batch.n = model.dimension();
  batch.h = h;
  batch.history = history;
  batch.seed = seed;
  batch.model_id = model.name();
  if (model.innovations().is_gaussian()) {
    batch.eps = draw_gaussian(S, batch.n, h, seed);
  } else {
    const auto& dists = model.innovations().distributions();
    batch.raw = bootstrap_innovations(dists, S, h, seed);
    batch.eps = pit_normalize(batch.raw, dists, h);
  }

  const auto lags = history.flat();
  const auto n = static_cast<std::size_t>(batch.n);
  batch.terminal.resize(static_cast<Eigen::Index>(S), batch.n);
  parallel_chunks(S, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s)
      propagate(model, lags, batch.model_innovations(s), h, {batch.terminal.data() + s * n, n}, s);
  });
  return batch;
}

Eigen::MatrixXd iterate_path(const ModelSpec& model, const History& history, const Eigen::MatrixXd& innovations) {
  check_history(model, history);
  const int n = model.dimension();
  if (innovations.cols() != n) throw Error("sim", Errc::dimension, "innovation matrix must have n columns");
  auto window = history.flat();
  Eigen::MatrixXd out(innovations.rows(), n);
  std::vector<double> u(static_cast<std::size_t>(n));
  std::vector<double> next(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < innovations.rows(); ++t) {
    for (int j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] = innovations(t, j);
    model.step(window, u, next);
    for (int j = 0; j < n; ++j) {
      const double v = next[static_cast<std::size_t>(j)];
      if (!std::isfinite(v) || std::abs(v) > kExplosionBound)
        throw Error("sim", Errc::explosion, "series exploded at observation " + std::to_string(t + 1));
      out(t, j) = v;
    }
    ModelSpec::advance(window, next);
  }
  return out;
}

Eigen::MatrixXd simulate_series(const ModelSpec& model, const History& history, std::size_t T, std::uint64_t seed) {
  const int n = model.dimension();
  Eigen::MatrixXd innov(static_cast<Eigen::Index>(T), n);
  PathRng rng(seed, StreamTag::series, 0);
  std::normal_distribution<double> normal;
  for (Eigen::Index t = 0; t < innov.rows(); ++t)
    for (int j = 0; j < n; ++j) innov(t, j) = model.innovations().to_raw(j, normal(rng));
  return iterate_path(model, history, innov);
}

namespace {

constexpr std::array<char, 4> kMagic{'H', 'F', 'V', 'D'};
constexpr std::uint32_t kBatchVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    os.write(bytes.data(), sizeof(T));
  } else {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
}

template <typename T>
T get(std::istream& is) {
  std::array<char, sizeof(T)> bytes{};
  if (!is.read(bytes.data(), sizeof(T))) throw Error("sim", Errc::io, "batch file is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

void write_batch(const std::filesystem::path& path, const SimulationBatch& batch) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("sim", Errc::io, "cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kBatchVersion);
  put<std::uint64_t>(os, batch.S);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(batch.n));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(batch.h));
  put<std::uint64_t>(os, batch.seed);
  for (Eigen::Index i = 0; i < batch.eps.size(); ++i) put<double>(os, batch.eps.data()[i]);
  for (Eigen::Index i = 0; i < batch.terminal.size(); ++i) put<double>(os, batch.terminal.data()[i]);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(batch.history.lags()));
  for (double v : batch.history.flat()) put<double>(os, v);
  if (!os) throw Error("sim", Errc::io, "failed writing " + path.string());
}

SimulationBatch read_batch(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("sim", Errc::io, "cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw Error("sim", Errc::io, path.string() + " is not a batch file");
  if (const auto v = get<std::uint32_t>(is); v != kBatchVersion)
    throw Error("sim", Errc::io, "unsupported batch version " + std::to_string(v));
  SimulationBatch b;
  b.S = get<std::uint64_t>(is);
  b.n = static_cast<int>(get<std::uint32_t>(is));
  b.h = static_cast<int>(get<std::uint32_t>(is));
  b.seed = get<std::uint64_t>(is);
  if (b.n < 1 || b.h < 1) throw Error("sim", Errc::io, "batch header has zero dimension or horizon");
  b.eps.resize(static_cast<Eigen::Index>(b.S), static_cast<Eigen::Index>(b.n) * b.h);
  for (Eigen::Index i = 0; i < b.eps.size(); ++i) b.eps.data()[i] = get<double>(is);
  b.terminal.resize(static_cast<Eigen::Index>(b.S), b.n);
  for (Eigen::Index i = 0; i < b.terminal.size(); ++i) b.terminal.data()[i] = get<double>(is);
  const auto p = static_cast<Eigen::Index>(get<std::uint32_t>(is));
  Eigen::MatrixXd lags(p, b.n);
  for (Eigen::Index l = 0; l < p; ++l)
    for (Eigen::Index c = 0; c < b.n; ++c) lags(l, c) = get<double>(is);
  b.history = History(std::move(lags));
  return b;
}

}  // namespace hfevd
