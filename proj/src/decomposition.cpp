#include "hfevd/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hfevd/error.hpp"
#include "hfevd/parallel.hpp"
#include "hfevd/rng.hpp"

namespace hfevd {

namespace {

void enumerate_rec(std::vector<int>& current, std::size_t pos, int remaining, int active_left,
                   std::vector<MultiIndex>& out) {
  if (remaining == 0) {
    out.emplace_back(current);
    return;
  }
  if (pos == current.size() || active_left == 0) return;
  for (int k = remaining; k >= 0; --k) {
    current[pos] = k;
    enumerate_rec(current, pos + 1, remaining - k, active_left - (k > 0 ? 1 : 0), out);
  }
  current[pos] = 0;
}

// Flattened (offset into the per-path value table, degree) pairs of one index.
struct CompiledIndex {
  std::vector<int> offsets;
  double norm = 1.0;
};

struct Compiled {
  int stride = 0;  // max_degree + 1
  std::vector<CompiledIndex> indices;
};

Compiled compile(const std::vector<MultiIndex>& indices, const ProjectionBasis& basis, const IndexLayout& layout) {
  Compiled c;
  c.stride = basis.max_degree + 1;
  c.indices.reserve(indices.size());
  for (const auto& K : indices) {
    if (static_cast<int>(K.size()) != layout.size())
      throw Error("hfevd", Errc::dimension,
                  "index length " + std::to_string(K.size()) + " differs from n*h = " + std::to_string(layout.size()));
    if (K.is_zero()) throw Error("hermite", Errc::domain, "the zero index has no variance contribution");
    if (K.max_degree() > basis.max_degree)
      throw Error("hfevd", Errc::spec,
                  "index degree " + std::to_string(K.max_degree()) + " exceeds the " + basis.name + " basis degree " +
                      std::to_string(basis.max_degree));
    CompiledIndex ci;
    for (auto [pos, deg] : K.active()) {
      ci.offsets.push_back(pos * c.stride + deg);
      const auto comp = static_cast<std::size_t>(layout.component_of(pos));
      ci.norm *= basis.second_moments.at(comp).at(static_cast<std::size_t>(deg));
    }
    c.indices.push_back(std::move(ci));
  }
  return c;
}

const RowMatrix& basis_inputs(const SimulationBatch& batch, const ProjectionBasis& basis) {
  if (basis.raw_inputs && batch.raw.size()) return batch.raw;
  return batch.eps;
}

void fill_values(const ProjectionBasis& basis, const IndexLayout& layout, const double* x, std::vector<double>& vals) {
  const int stride = basis.max_degree + 1;
  for (int pos = 0; pos < layout.size(); ++pos)
    basis.evaluate(layout.component_of(pos), x[pos],
                   std::span<double>(vals.data() + pos * stride, static_cast<std::size_t>(stride)));
}

double eval_index(const CompiledIndex& ci, const std::vector<double>& vals) {
  double v = 1.0;
  for (int off : ci.offsets) v *= vals[static_cast<std::size_t>(off)];
  return v;
}

std::vector<CoefficientEstimate> projection_pass(const SimulationBatch& batch, const Compiled& compiled,
                                                 const ProjectionBasis& basis) {
  const IndexLayout layout = batch.layout();
  const RowMatrix& X = basis_inputs(batch, basis);
  const std::size_t S = batch.S;
  const auto n = static_cast<std::size_t>(batch.n);
  const std::size_t nk = compiled.indices.size();
  const std::size_t chunks = chunk_count(S);
  // per chunk: [K][component] sums of y*H and (y*H)^2
  std::vector<std::vector<double>> partial(chunks);

  parallel_chunks(S, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& acc = partial[c];
    acc.assign(nk * n * 2, 0.0);
    std::vector<double> vals(static_cast<std::size_t>(layout.size() * compiled.stride));
    for (std::size_t s = begin; s < end; ++s) {
      fill_values(basis, layout, X.data() + s * static_cast<std::size_t>(X.cols()), vals);
      const double* y = batch.terminal.data() + s * n;
      for (std::size_t k = 0; k < nk; ++k) {
        const double H = eval_index(compiled.indices[k], vals);
        double* a = acc.data() + k * n * 2;
        for (std::size_t i = 0; i < n; ++i) {
          const double v = y[i] * H;
          a[2 * i] += v;
          a[2 * i + 1] += v * v;
        }
      }
    }
  });

  std::vector<double> total(nk * n * 2, 0.0);
  for (const auto& acc : partial)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += acc[i];

  const double Sd = static_cast<double>(S);
  std::vector<CoefficientEstimate> out(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    const double norm = compiled.indices[k].norm;
    out[k].coeff.resize(batch.n);
    out[k].se.resize(batch.n);
    for (std::size_t i = 0; i < n; ++i) {
      const double sum = total[(k * n + i) * 2];
      const double sq = total[(k * n + i) * 2 + 1];
      const double mean = sum / Sd;
      const double var = S > 1 ? std::max(0.0, (sq - Sd * mean * mean) / (Sd - 1.0)) : 0.0;
      out[k].coeff(static_cast<Eigen::Index>(i)) = mean / norm;
      out[k].se(static_cast<Eigen::Index>(i)) = std::sqrt(var / Sd) / norm;
    }
  }
  return out;
}

Eigen::VectorXd column_means(const RowMatrix& m) {
  const auto cols = static_cast<std::size_t>(m.cols());
  const std::size_t rows = static_cast<std::size_t>(m.rows());
  std::vector<std::vector<double>> partial(chunk_count(rows));
  parallel_chunks(rows, [&](std::size_t c, std::size_t begin, std::size_t end) {
    partial[c].assign(cols, 0.0);
    for (std::size_t s = begin; s < end; ++s)
      for (std::size_t i = 0; i < cols; ++i) partial[c][i] += m.data()[s * cols + i];
  });
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m.cols());
  for (const auto& p : partial)
    for (std::size_t i = 0; i < cols; ++i) mean(static_cast<Eigen::Index>(i)) += p[i];
  return mean / static_cast<double>(rows);
}

template <typename T>
bool in_range(T v, T hi) {
  return v >= 0 && v < hi;
}

void check_component(int j, const IndexLayout& layout, const std::string& name) {
  if (!in_range(j, layout.n))
    throw Error("hfevd", Errc::spec,
                "partition '" + name + "' refers to component " + std::to_string(j + 1) + " but the model has " +
                    std::to_string(layout.n));
}

bool selected(const Selector& sel, const MultiIndex& K, const IndexLayout& layout) {
  auto block_has = [&](int j) {
    for (int i = 0; i < layout.h; ++i)
      if (K[static_cast<std::size_t>(layout.position(j, i))] != 0) return true;
    return false;
  };
  auto outside_has = [&](int j) {
    for (auto [pos, deg] : K.active())
      if (layout.component_of(pos) != j) return true;
    return false;
  };
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, select::Linear>) {
          return K.total_degree() == 1;
        } else if constexpr (std::is_same_v<T, select::Nonlinear>) {
          return K.total_degree() >= 2;
        } else if constexpr (std::is_same_v<T, select::Marginal>) {
          return block_has(s.component) && !outside_has(s.component) &&
                 (s.max_degree <= 0 || K.total_degree() <= s.max_degree);
        } else if constexpr (std::is_same_v<T, select::Specific>) {
          const auto act = K.active();
          if (act.size() != 1 || act[0].second != s.degree) return false;
          if (layout.component_of(act[0].first) != s.component) return false;
          return !s.horizon || layout.horizon_of(act[0].first) == *s.horizon;
        } else if constexpr (std::is_same_v<T, select::JointInteraction>) {
          return block_has(s.component) && outside_has(s.component);
        } else if constexpr (std::is_same_v<T, select::IsakinNgo>) {
          return block_has(s.component);
        } else if constexpr (std::is_same_v<T, select::Interaction>) {
          const auto act = K.active();
          if (act.size() != 2) return false;
          for (int a = 0; a < 2; ++a) {
            const auto [p1, d1] = act[static_cast<std::size_t>(a)];
            const auto [p2, d2] = act[static_cast<std::size_t>(1 - a)];
            if (layout.component_of(p1) == s.component1 && d1 == s.degree1 && layout.component_of(p2) == s.component2 &&
                d2 == s.degree2 && layout.horizon_of(p1) == layout.horizon_of(p2) + s.lag)
              return true;
          }
          return false;
        } else {
          return std::find(s.indices.begin(), s.indices.end(), K) != s.indices.end();
        }
      },
      sel);
}

void validate(const PartitionSpec& spec, const IndexLayout& layout) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, select::Marginal> || std::is_same_v<T, select::JointInteraction> ||
                      std::is_same_v<T, select::IsakinNgo>) {
          check_component(s.component, layout, spec.name);
        } else if constexpr (std::is_same_v<T, select::Specific>) {
          check_component(s.component, layout, spec.name);
          if (s.horizon && !in_range(*s.horizon, layout.h))
            throw Error("hfevd", Errc::spec, "partition '" + spec.name + "' horizon out of range");
          if (s.degree < 1) throw Error("hfevd", Errc::spec, "partition '" + spec.name + "' needs degree >= 1");
        } else if constexpr (std::is_same_v<T, select::Interaction>) {
          check_component(s.component1, layout, spec.name);
          check_component(s.component2, layout, spec.name);
          if (s.degree1 < 1 || s.degree2 < 1)
            throw Error("hfevd", Errc::spec, "partition '" + spec.name + "' needs degrees >= 1");
        } else if constexpr (std::is_same_v<T, select::Explicit>) {
          for (const auto& K : s.indices)
            if (static_cast<int>(K.size()) != layout.size())
              throw Error("hfevd", Errc::spec, "partition '" + spec.name + "' lists an index of the wrong length");
        }
      },
      spec.selector);
}

}  // namespace

std::vector<MultiIndex> enumerate_indices(int n, int h, int max_total_degree, int max_active) {
  if (n < 1 || h < 1) throw Error("hfevd", Errc::parameter, "n and h must be >= 1");
  if (max_total_degree < 1 || max_active < 1)
    throw Error("hfevd", Errc::parameter, "truncation needs max_total_degree >= 1 and max_active >= 1");
  if (max_total_degree > kMaxHermiteDegree)
    throw Error("hermite", Errc::domain, "truncation degree exceeds " + std::to_string(kMaxHermiteDegree));
  std::vector<MultiIndex> out;
  std::vector<int> current(static_cast<std::size_t>(n * h), 0);
  for (int t = 1; t <= max_total_degree; ++t) enumerate_rec(current, 0, t, max_active, out);
  return out;
}

ProjectionBasis hermite_basis(int n, int max_degree) {
  if (max_degree < 1 || max_degree > kMaxHermiteDegree)
    throw Error("hermite", Errc::domain, "Hermite basis degree outside [1, 32]");
  ProjectionBasis b;
  b.name = "hermite";
  b.max_degree = max_degree;
  b.evaluate = [](int, double x, std::span<double> out) { hermite_eval_all(x, out); };
  std::vector<double> moments(static_cast<std::size_t>(max_degree + 1));
  for (int k = 0; k <= max_degree; ++k) moments[static_cast<std::size_t>(k)] = factorial(k);
  b.second_moments.assign(static_cast<std::size_t>(n), moments);
  return b;
}

std::vector<CoefficientEstimate> estimate_coefficients(const SimulationBatch& batch,
                                                       const std::vector<MultiIndex>& indices) {
  int d = 1;
  for (const auto& K : indices) d = std::max(d, K.max_degree());
  const auto basis = hermite_basis(batch.n, d);
  return projection_pass(batch, compile(indices, basis, batch.layout()), basis);
}

CoefficientEstimate estimate_coefficient(const SimulationBatch& batch, const MultiIndex& index) {
  return estimate_coefficients(batch, {index}).front();
}

ContributionEntry variance_contribution(const Eigen::VectorXd& coeff, const MultiIndex& index) {
  ContributionEntry e;
  e.index = index;
  e.coeff = coeff;
  e.matrix = coeff * coeff.transpose() * hermite_variance(index);
  return e;
}

Eigen::MatrixXd total_conditional_variance(const SimulationBatch& batch) {
  if (batch.S < 2) throw Error("hfevd", Errc::parameter, "total variance needs S >= 2");
  const Eigen::VectorXd mean = column_means(batch.terminal);
  const auto n = static_cast<std::size_t>(batch.n);
  std::vector<Eigen::MatrixXd> partial(chunk_count(batch.S));
  parallel_chunks(batch.S, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(batch.n, batch.n);
    for (std::size_t s = begin; s < end; ++s) {
      const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(batch.terminal.data() + s * n, batch.n) - mean;
      acc.noalias() += d * d.transpose();
    }
    partial[c] = std::move(acc);
  });
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(batch.n, batch.n);
  for (const auto& p : partial) total += p;
  return total / static_cast<double>(batch.S - 1);
}

std::vector<std::size_t> partition_select(const PartitionSpec& spec, const std::vector<MultiIndex>& indices,
                                          const IndexLayout& layout) {
  validate(spec, layout);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < indices.size(); ++k)
    if (selected(spec.selector, indices[k], layout)) out.push_back(k);
  return out;
}

const ContributionEntry* DecompositionReport::find(const MultiIndex& index) const {
  for (const auto& e : entries)
    if (e.index == index) return &e;
  return nullptr;
}

const PartitionAggregate* DecompositionReport::partition(const std::string& name) const {
  for (const auto& p : partitions)
    if (p.name == name) return &p;
  return nullptr;
}

DecompositionReport decompose_batch(const SimulationBatch& batch, const std::vector<MultiIndex>& indices,
                                    const std::vector<PartitionSpec>& partitions, const ProjectionBasis& basis) {
  if (batch.S < 2) throw Error("hfevd", Errc::parameter, "decomposition needs S >= 2");
  const IndexLayout layout = batch.layout();
  const Compiled compiled = compile(indices, basis, layout);
  const auto estimates = projection_pass(batch, compiled, basis);
  const auto n = static_cast<std::size_t>(batch.n);
  const Eigen::Index ni = batch.n;

  DecompositionReport r;
  r.metadata.model_id = batch.model_id;
  r.metadata.history = batch.history.matrix();
  r.metadata.h = batch.h;
  r.metadata.S = batch.S;
  r.metadata.seed = batch.seed;
  r.metadata.basis = basis.name;
  r.total = total_conditional_variance(batch);
  r.degenerate = r.total.trace() < 1e-14;

  r.entries.reserve(indices.size());
  Eigen::MatrixXd explained = Eigen::MatrixXd::Zero(ni, ni);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    ContributionEntry e;
    e.index = indices[k];
    e.coeff = estimates[k].coeff;
    e.coeff_se = estimates[k].se;
    const double norm = compiled.indices[k].norm;
    e.matrix = e.coeff * e.coeff.transpose() * norm;
    e.matrix_se = norm * (2.0 * e.coeff.cwiseAbs().cwiseProduct(e.coeff_se) + e.coeff_se.cwiseAbs2());
    explained += e.matrix;
    r.entries.push_back(std::move(e));
  }
  r.residual = r.total - explained;

  std::vector<std::vector<std::size_t>> members;
  for (const auto& p : partitions) members.push_back(partition_select(p, indices, layout));

  // Second pass: influence functions of the partition aggregates, the
  // residual trace and the diagonal of the total.
  const Eigen::VectorXd mean = column_means(batch.terminal);
  const std::size_t np = partitions.size();
  const std::size_t width = (np * n + 1 + n) * 2;
  const RowMatrix& X = basis_inputs(batch, basis);
  std::vector<std::vector<double>> partial(chunk_count(batch.S));
  parallel_chunks(batch.S, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& acc = partial[c];
    acc.assign(width, 0.0);
    std::vector<double> vals(static_cast<std::size_t>(layout.size() * compiled.stride));
    std::vector<double> H(indices.size());
    std::vector<double> fit(n);
    for (std::size_t s = begin; s < end; ++s) {
      fill_values(basis, layout, X.data() + s * static_cast<std::size_t>(X.cols()), vals);
      const double* y = batch.terminal.data() + s * n;
      std::fill(fit.begin(), fit.end(), 0.0);
      for (std::size_t k = 0; k < indices.size(); ++k) {
        H[k] = eval_index(compiled.indices[k], vals);
        for (std::size_t i = 0; i < n; ++i) fit[i] += estimates[k].coeff(static_cast<Eigen::Index>(i)) * H[k];
      }
      std::size_t slot = 0;
      auto add = [&](double v) {
        acc[slot++] += v;
        acc[slot++] += v * v;
      };
      for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t i = 0; i < n; ++i) {
          double f = 0.0;
          for (std::size_t k : members[p]) f += estimates[k].coeff(static_cast<Eigen::Index>(i)) * H[k];
          add(2.0 * y[i] * f);
        }
      }
      double psi = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = y[i] - mean(static_cast<Eigen::Index>(i));
        psi += d * d - 2.0 * y[i] * fit[i];
      }
      add(psi);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = y[i] - mean(static_cast<Eigen::Index>(i));
        add(d * d);
      }
    }
  });
  std::vector<double> sums(width, 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < width; ++i) sums[i] += p[i];
  const double Sd = static_cast<double>(batch.S);
  auto se_at = [&](std::size_t slot) {
    const double m = sums[2 * slot] / Sd;
    const double var = std::max(0.0, (sums[2 * slot + 1] - Sd * m * m) / (Sd - 1.0));
    return std::sqrt(var / Sd);
  };

  for (std::size_t p = 0; p < np; ++p) {
    PartitionAggregate agg;
    agg.name = partitions[p].name;
    agg.members = members[p];
    agg.matrix = Eigen::MatrixXd::Zero(ni, ni);
    for (std::size_t k : agg.members) agg.matrix += r.entries[k].matrix;
    agg.se.resize(ni);
    for (std::size_t i = 0; i < n; ++i) agg.se(static_cast<Eigen::Index>(i)) = se_at(p * n + i);
    r.partitions.push_back(std::move(agg));
  }
  r.residual_trace_se = se_at(np * n);
  r.total_se.resize(ni);
  for (std::size_t i = 0; i < n; ++i) r.total_se(static_cast<Eigen::Index>(i)) = se_at(np * n + 1 + i);

  if (r.degenerate) {
    r.warnings.push_back("total conditional variance is numerically zero; shares omitted");
  } else {
    const Eigen::VectorXd diag = r.total.diagonal();
    auto share = [&](const Eigen::MatrixXd& m) {
      Eigen::VectorXd out(ni);
      for (Eigen::Index i = 0; i < ni; ++i) out(i) = diag(i) > 0.0 ? m(i, i) / diag(i) : 0.0;
      return out;
    };
    for (auto& e : r.entries) e.share = share(e.matrix);
    for (auto& p : r.partitions) p.share = share(p.matrix);
  }
  if (r.residual.trace() < -5.0 * r.residual_trace_se)
    r.warnings.push_back("explained variance exceeds the total by more than 5 standard errors");
  return r;
}

DecompositionReport decompose(const ModelSpec& model, const History& history, int h, std::size_t S,
                              std::uint64_t seed, const Truncation& truncation,
                              const std::vector<PartitionSpec>& partitions) {
  const auto batch = simulate_batch(model, history, h, S, seed);
  const auto indices = enumerate_indices(model.dimension(), h, truncation.max_total_degree, truncation.max_active);
  auto report = decompose_batch(batch, indices, partitions, hermite_basis(model.dimension(), truncation.max_total_degree));
  report.metadata.theta = model.theta();
  std::ostringstream os;
  os << "total degree <= " << truncation.max_total_degree << ", active entries <= " << truncation.max_active;
  report.metadata.index_set = os.str();
  report.warnings.insert(report.warnings.begin(), model.warnings().begin(), model.warnings().end());
  return report;
}

NestedEstimate isakin_ngo_direct(const ModelSpec& model, const History& history, int h, int component,
                                 std::size_t S_outer, std::size_t S_inner, std::uint64_t seed) {
  check_history(model, history);
  const int n = model.dimension();
  if (!in_range(component, n)) throw Error("hfevd", Errc::spec, "component out of range");
  if (S_outer < 2 || S_inner < 2) throw Error("hfevd", Errc::parameter, "nested sample sizes must be >= 2");
  if (h < 1) throw Error("hfevd", Errc::parameter, "horizon h must be >= 1");
  const IndexLayout layout{n, h};
  const auto lags = history.flat();
  const auto un = static_cast<std::size_t>(n);
  const std::size_t chunk = 16;
  const std::size_t chunks = chunk_count(S_outer, chunk);
  std::vector<Eigen::MatrixXd> sum_cov(chunks);
  std::vector<Eigen::VectorXd> sum_sq(chunks);

  parallel_chunks(
      S_outer,
      [&](std::size_t c, std::size_t begin, std::size_t end) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd acc_sq = Eigen::VectorXd::Zero(n);
        std::vector<double> eps(static_cast<std::size_t>(layout.size()));
        std::vector<double> raw(eps.size());
        std::vector<double> out(un);
        Eigen::MatrixXd Y(static_cast<Eigen::Index>(S_inner), n);
        std::normal_distribution<double> normal;
        for (std::size_t o = begin; o < end; ++o) {
          PathRng outer(seed, StreamTag::nested_outer, o);
          for (int pos = 0; pos < layout.size(); ++pos)
            if (layout.component_of(pos) != component) eps[static_cast<std::size_t>(pos)] = normal(outer);
          normal.reset();
          for (std::size_t k = 0; k < S_inner; ++k) {
            PathRng inner(seed, StreamTag::nested_inner, o * S_inner + k);
            for (int i = 0; i < h; ++i) eps[static_cast<std::size_t>(layout.position(component, i))] = normal(inner);
            normal.reset();
            for (int pos = 0; pos < layout.size(); ++pos)
              raw[static_cast<std::size_t>(pos)] =
                  model.innovations().to_raw(layout.component_of(pos), eps[static_cast<std::size_t>(pos)]);
            propagate(model, lags, raw, h, out, o);
            for (int i = 0; i < n; ++i) Y(static_cast<Eigen::Index>(k), i) = out[static_cast<std::size_t>(i)];
          }
          const Eigen::RowVectorXd m = Y.colwise().mean();
          const Eigen::MatrixXd centered = Y.rowwise() - m;
          const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(S_inner - 1);
          acc += cov;
          acc_sq += cov.diagonal().cwiseAbs2();
        }
        sum_cov[c] = std::move(acc);
        sum_sq[c] = std::move(acc_sq);
      },
      chunk);

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(n);
  for (std::size_t c = 0; c < chunks; ++c) {
    total += sum_cov[c];
    sq += sum_sq[c];
  }
  const double So = static_cast<double>(S_outer);
  NestedEstimate est;
  est.value = total / So;
  const Eigen::VectorXd m = est.value.diagonal();
  est.se = ((sq - So * m.cwiseAbs2()) / (So - 1.0)).cwiseMax(0.0).cwiseSqrt() / std::sqrt(So);
  return est;
}

}  // namespace hfevd
