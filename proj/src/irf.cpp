#include "hfevd/irf.hpp"

#include <cmath>
#include <random>

#include "hfevd/decomposition.hpp"
#include "hfevd/error.hpp"
#include "hfevd/parallel.hpp"
#include "hfevd/rng.hpp"
#include "hfevd/simulation.hpp"

namespace hfevd {

namespace {

void check_shock(const ModelSpec& model, const ShockSpec& shock) {
  if (shock.component < 0 || shock.component >= model.dimension())
    throw Error("irf", Errc::parameter, "shock component out of range");
  if (!std::isfinite(shock.magnitude)) throw Error("irf", Errc::parameter, "shock magnitude must be finite");
}

// Runs the model h steps and stores every Y_{t+i} row into `path` (h x n,
// row-major).
void trajectory(const ModelSpec& model, std::span<const double> lags, std::span<const double> eps, int h,
                std::vector<double>& window, std::vector<double>& u, std::vector<double>& path, std::size_t id) {
  const auto n = static_cast<std::size_t>(model.dimension());
  window.assign(lags.begin(), lags.end());
  for (int i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      u[j] = model.innovations().to_raw(static_cast<int>(j), eps[j * static_cast<std::size_t>(h) + static_cast<std::size_t>(i)]);
    std::span<double> next(path.data() + static_cast<std::size_t>(i) * n, n);
    model.step(window, u, next);
    for (double v : next)
      if (!std::isfinite(v) || std::abs(v) > kExplosionBound)
        throw Error("sim", Errc::explosion,
                    "path " + std::to_string(id) + " exploded at step " + std::to_string(i + 1));
    ModelSpec::advance(window, next);
  }
}

void check_inputs(const ModelSpec& model, const History& history, int h, const ShockSpec& shock, std::size_t S) {
  check_history(model, history);
  check_shock(model, shock);
  if (h < 1) throw Error("irf", Errc::parameter, "horizon h must be >= 1");
  if (S < 2) throw Error("irf", Errc::parameter, "path count S must be >= 2");
}

IrfPath simulate_responses(const ModelSpec& model, const History& history, int h, const ShockSpec& shock,
                           std::size_t S, std::uint64_t seed) {
  check_inputs(model, history, h, shock, S);
  const int n = model.dimension();
  const auto un = static_cast<std::size_t>(n);
  const std::size_t width = static_cast<std::size_t>(h) * un;
  const std::size_t shocked = static_cast<std::size_t>(shock.component) * static_cast<std::size_t>(h);
  const auto lags = history.flat();
  const RowMatrix eps = draw_gaussian(S, n, h, seed);

  std::vector<std::vector<double>> partial(chunk_count(S));
  parallel_chunks(S, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& acc = partial[c];
    acc.assign(2 * width, 0.0);
    std::vector<double> window, u(un), base(width), pert(width);
    std::vector<double> row(static_cast<std::size_t>(eps.cols()));
    for (std::size_t s = begin; s < end; ++s) {
      const double* e = eps.data() + s * row.size();
      std::copy(e, e + row.size(), row.begin());
      trajectory(model, lags, row, h, window, u, base, s);
      row[shocked] = shock.kind == ShockKind::additive ? row[shocked] + shock.magnitude : shock.magnitude;
      trajectory(model, lags, row, h, window, u, pert, s);
      for (std::size_t k = 0; k < width; ++k) {
        const double d = pert[k] - base[k];
        acc[k] += d;
        acc[width + k] += d * d;
      }
    }
  });
  std::vector<double> sums(2 * width, 0.0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += p[k];

  const double Sd = static_cast<double>(S);
  IrfPath out{Eigen::MatrixXd(h, n), Eigen::MatrixXd(h, n)};
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j);
      const double m = sums[k] / Sd;
      const double var = std::max(0.0, (sums[width + k] - Sd * m * m) / (Sd - 1.0));
      out.mean(i, j) = m;
      out.se(i, j) = std::sqrt(var / Sd);
    }
  return out;
}

Eigen::MatrixXd mit_path(const ModelSpec& model, const History& history, int h, const ShockSpec& shock) {
  check_history(model, history);
  check_shock(model, shock);
  if (h < 1) throw Error("irf", Errc::parameter, "horizon h must be >= 1");
  const int n = model.dimension();
  const auto un = static_cast<std::size_t>(n);
  const auto lags = history.flat();
  std::vector<double> eps(un * static_cast<std::size_t>(h), 0.0);
  std::vector<double> window, u(un), base(un * static_cast<std::size_t>(h)), pert(base.size());
  trajectory(model, lags, eps, h, window, u, base, 0);
  eps[static_cast<std::size_t>(shock.component) * static_cast<std::size_t>(h)] = shock.magnitude;
  trajectory(model, lags, eps, h, window, u, pert, 0);
  Eigen::MatrixXd out(h, n);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j);
      out(i, j) = pert[k] - base[k];
    }
  return out;
}

IrfEstimate last_row(const IrfPath& p) {
  return {p.mean.row(p.mean.rows() - 1).transpose(), p.se.row(p.se.rows() - 1).transpose()};
}

struct StencilPoint {
  int offset;
  double weight;
};

std::vector<StencilPoint> stencil(int order) {
  switch (order) {
    case 0: return {{0, 1.0}};
    case 1: return {{-1, -0.5}, {1, 0.5}};
    case 2: return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    case 3: return {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
    case 4: return {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}};
    default: throw Error("irf", Errc::parameter, "derivative order must be in [0, 4]");
  }
}

}  // namespace

IrfEstimate eirf(const ModelSpec& model, const History& history, int h, const ShockSpec& shock, std::size_t S,
                 std::uint64_t seed) {
  if (shock.kind != ShockKind::additive) throw Error("irf", Errc::parameter, "eirf needs an additive shock");
  return last_row(simulate_responses(model, history, h, shock, S, seed));
}

IrfEstimate girf(const ModelSpec& model, const History& history, int h, const ShockSpec& shock, std::size_t S,
                 std::uint64_t seed) {
  if (shock.kind != ShockKind::pegged) throw Error("irf", Errc::parameter, "girf needs a pegged shock");
  return last_row(simulate_responses(model, history, h, shock, S, seed));
}

Eigen::VectorXd mit_irf(const ModelSpec& model, const History& history, int h, const ShockSpec& shock) {
  if (shock.kind != ShockKind::mit) throw Error("irf", Errc::parameter, "mit_irf needs an mit shock");
  const Eigen::MatrixXd p = mit_path(model, history, h, shock);
  return p.row(h - 1).transpose();
}

IrfPath irf_path(const ModelSpec& model, const History& history, int h, const ShockSpec& shock, std::size_t S,
                 std::uint64_t seed) {
  if (shock.kind == ShockKind::mit) {
    Eigen::MatrixXd m = mit_path(model, history, h, shock);
    return {m, Eigen::MatrixXd::Zero(m.rows(), m.cols())};
  }
  return simulate_responses(model, history, h, shock, S, seed);
}

double default_fd_step(int order) { return order <= 2 ? 1e-2 : 5e-2; }

IrfEstimate cross_multiplier(const ModelSpec& model, const History& history, const std::vector<int>& degrees,
                             std::size_t S, std::uint64_t seed, std::optional<double> fd_step) {
  check_history(model, history);
  const int n = model.dimension();
  if (static_cast<int>(degrees.size()) != n)
    throw Error("irf", Errc::dimension, "degree vector must have one entry per component");
  if (S < 2) throw Error("irf", Errc::parameter, "path count S must be >= 2");
  int total = 0;
  int top = 0;
  for (int k : degrees) {
    if (k < 0 || k > 4) throw Error("irf", Errc::parameter, "derivative order must be in [0, 4]");
    total += k;
    top = std::max(top, k);
  }
  const double step = fd_step.value_or(default_fd_step(top));
  if (!(step > 0.0)) throw Error("irf", Errc::parameter, "fd_step must be > 0");

  // Tensor product of the per-component stencils.
  struct Point {
    std::vector<int> offsets;
    double weight;
  };
  std::vector<Point> points{{std::vector<int>(static_cast<std::size_t>(n), 0), 1.0}};
  for (int j = 0; j < n; ++j) {
    std::vector<Point> next;
    for (const auto& p : points)
      for (auto [off, w] : stencil(degrees[static_cast<std::size_t>(j)])) {
        Point q = p;
        q.offsets[static_cast<std::size_t>(j)] = off;
        q.weight *= w;
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  const double scale = std::pow(step, -total);

  const auto un = static_cast<std::size_t>(n);
  const auto lags = history.flat();
  const RowMatrix eps = draw_gaussian(S, n, 1, seed);
  std::vector<std::vector<double>> partial(chunk_count(S));
  parallel_chunks(S, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& acc = partial[c];
    acc.assign(2 * un, 0.0);
    std::vector<double> e(un), u(un), y(un), d(un);
    for (std::size_t s = begin; s < end; ++s) {
      std::fill(d.begin(), d.end(), 0.0);
      for (const auto& p : points) {
        for (std::size_t j = 0; j < un; ++j) {
          e[j] = eps(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) + p.offsets[j] * step;
          u[j] = model.innovations().to_raw(static_cast<int>(j), e[j]);
        }
        model.step(lags, u, y);
        for (std::size_t j = 0; j < un; ++j) d[j] += p.weight * y[j];
      }
      for (std::size_t j = 0; j < un; ++j) {
        const double v = d[j] * scale;
        acc[j] += v;
        acc[un + j] += v * v;
      }
    }
  });
  std::vector<double> sums(2 * un, 0.0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += p[k];
  const double Sd = static_cast<double>(S);
  IrfEstimate out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (std::size_t j = 0; j < un; ++j) {
    const double m = sums[j] / Sd;
    out.mean(static_cast<Eigen::Index>(j)) = m;
    out.se(static_cast<Eigen::Index>(j)) = std::sqrt(std::max(0.0, (sums[un + j] - Sd * m * m) / (Sd - 1.0)) / Sd);
  }
  return out;
}

IrfEstimate impact_multiplier(const ModelSpec& model, const History& history, int order, int component,
                              std::size_t S, std::uint64_t seed, std::optional<double> fd_step) {
  if (component < 0 || component >= model.dimension())
    throw Error("irf", Errc::parameter, "component out of range");
  if (order < 1 || order > 4) throw Error("irf", Errc::parameter, "multiplier order must be in [1, 4]");
  if (fd_step && !(*fd_step > 0.0)) throw Error("irf", Errc::parameter, "fd_step must be > 0");
  std::vector<int> degrees(static_cast<std::size_t>(model.dimension()), 0);
  degrees[static_cast<std::size_t>(component)] = order;
  return cross_multiplier(model, history, degrees, S, seed, fd_step);
}

MultiplierLink verify_multiplier_link(const ModelSpec& model, const History& history, const std::vector<int>& degrees,
                                      std::size_t S, std::uint64_t seed) {
  if (!model.innovations().is_gaussian())
    throw Error("irf", Errc::capability, "the multiplier link holds for Gaussian innovations only");
  MultiplierLink link;
  link.degrees = degrees;
  const auto m = cross_multiplier(model, history, degrees, S, seed);
  const MultiIndex K(degrees);
  const double norm = hermite_variance(K);
  link.multiplier = m.mean;
  link.multiplier_se = m.se;
  link.from_multiplier = m.mean * m.mean.transpose() / norm;
  link.from_multiplier_se = (2.0 * m.mean.cwiseAbs().cwiseProduct(m.se) + m.se.cwiseAbs2()) / norm;

  const auto batch = simulate_batch(model, history, 1, S, seed);
  const auto report = decompose_batch(batch, {K}, {}, hermite_basis(model.dimension(), std::max(1, K.max_degree())));
  link.hfevd = report.entries.front().matrix;
  link.hfevd_se = report.entries.front().matrix_se;
  return link;
}

}  // namespace hfevd
