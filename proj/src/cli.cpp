#include "hfevd/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hfevd/data.hpp"
#include "hfevd/error.hpp"
#include "hfevd/estimation.hpp"
#include "hfevd/irf.hpp"
#include "hfevd/ortho_poly.hpp"
#include "hfevd/parallel.hpp"
#include "hfevd/registry.hpp"
#include "hfevd/simulation.hpp"

namespace hfevd {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error("cli", Errc::schema, msg); }

const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema(where + " needs '" + key + "'");
  return j.at(key);
}

int integer(const Json& j, const char* key, const std::string& where, std::optional<int> fallback = std::nullopt) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    schema(where + " needs '" + key + "'");
  }
  const Json& v = j.at(key);
  if (!v.is_number_integer()) schema(where + "." + key + " must be an integer");
  return v.get<int>();
}

double real(const Json& j, const char* key, const std::string& where, std::optional<double> fallback = std::nullopt) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    schema(where + " needs '" + key + "'");
  }
  const Json& v = j.at(key);
  if (!v.is_number()) schema(where + "." + key + " must be a number");
  return v.get<double>();
}

std::string text(const Json& j, const char* key, const std::string& where,
                 std::optional<std::string> fallback = std::nullopt) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    schema(where + " needs '" + key + "'");
  }
  const Json& v = j.at(key);
  if (!v.is_string()) schema(where + "." + key + " must be a string");
  return v.get<std::string>();
}

// 1-based in configs, 0-based in the library.
int component(const Json& j, const char* key, const std::string& where) {
  const int c = integer(j, key, where);
  if (c < 1) schema(where + "." + key + " is 1-based and must be >= 1");
  return c - 1;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", Errc::io, "cannot open " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    schema(path.string() + " is not valid JSON: " + e.what());
  }
}

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Run {
  std::string command;
  Json cfg;
  fs::path base;
  fs::path out;
  std::uint64_t seed = 0;
  std::optional<Dataset> data;
  Json run = Json::object();

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
  }
  void write(const std::string& name, const std::string& contents) const {
    write_file_atomic(out / name, contents);
  }
};

void load_data(Run& r) {
  if (!r.cfg.contains("data")) return;
  const Json& d = r.cfg.at("data");
  const fs::path path = r.resolve(text(d, "path", "data"));
  std::optional<std::string> date_column;
  if (d.contains("date_column")) date_column = text(d, "date_column", "data");
  std::vector<ColumnSpec> columns;
  for (const Json& c : need(d, "columns", "data")) {
    ColumnSpec spec;
    if (c.is_string()) {
      spec.name = c.get<std::string>();
    } else {
      spec.name = text(c, "name", "data.columns[]");
      spec.transform = transform_from_string(text(c, "transform", "data.columns[]", "none"));
      spec.window = integer(c, "window", "data.columns[]", 3);
    }
    columns.push_back(std::move(spec));
  }
  r.data = ingest_csv(path, date_column, columns);
}

const Dataset& require_data(const Run& r, const std::string& why) {
  if (!r.data) schema(why + " needs a data block");
  return *r.data;
}

std::vector<EmpiricalDistribution> columns_to_distributions(const Eigen::MatrixXd& m) {
  std::vector<EmpiricalDistribution> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    out.emplace_back(std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows()));
  return out;
}

ModelSpec load_model(const Run& r) {
  const Json& m = need(r.cfg, "model", "config");
  ModelSpec model = [&] {
    if (m.contains("fit")) return tvar_fit_from_json(read_json(r.resolve(text(m, "fit", "model")))).to_model();
    return ModelRegistry::defaults().build(text(m, "name", "model"), m.value("params", Json::object()));
  }();

  if (!r.cfg.contains("innovations")) return model;
  const Json& inn = r.cfg.at("innovations");
  const std::string kind = text(inn, "kind", "innovations");
  if (kind == "gaussian") return model;
  if (kind != "empirical") schema("innovations.kind must be 'gaussian' or 'empirical'");

  Eigen::MatrixXd sample;
  if (inn.contains("sample")) {
    // One array per component.
    const Json& s = inn.at("sample");
    if (!s.is_array() || s.size() != static_cast<std::size_t>(model.dimension()))
      schema("innovations.sample needs one array per model component");
    std::vector<EmpiricalDistribution> dists;
    for (const Json& col : s) dists.emplace_back(col.get<std::vector<double>>());
    return model.with_innovations(InnovationKind::empirical(std::move(dists)));
  }
  if (inn.contains("path")) {
    const CsvTable table = read_csv(r.resolve(text(inn, "path", "innovations")));
    std::vector<ColumnSpec> cols;
    if (inn.contains("columns")) {
      for (const Json& c : inn.at("columns")) cols.push_back({c.get<std::string>(), Transform::none, 3});
    } else {
      for (const auto& h : table.header) cols.push_back({h, Transform::none, 3});
    }
    sample = transform_table(table, std::nullopt, cols).values;
  } else {
    const std::string source = text(inn, "source", "innovations", "residuals");
    if (source != "residuals") schema("innovations.source must be 'residuals'");
    sample = extract_residuals(model, require_data(r, "residual-based innovations").values);
  }
  if (sample.cols() != model.dimension()) schema("innovation sample width differs from the model dimension");
  return model.with_innovations(InnovationKind::empirical(columns_to_distributions(sample)));
}

History load_history(const Run& r, const ModelSpec& model) {
  const Json sel = r.run.value("history", Json::object());
  if (sel.contains("values")) return History(matrix_from_json(sel.at("values"), "run.history.values"));
  HistorySelector hs;
  const std::string how = text(sel, "select", "run.history", "last");
  if (how == "row") {
    hs.kind = HistorySelector::Kind::row;
    const int row = integer(sel, "row", "run.history");
    if (row < 1) schema("run.history.row is 1-based and must be >= 1");
    hs.row = static_cast<std::size_t>(row - 1);
  } else if (how == "date") {
    hs.kind = HistorySelector::Kind::date;
    hs.date = text(sel, "date", "run.history");
  } else if (how != "last") {
    schema("run.history.select must be 'last', 'row' or 'date'");
  }
  return select_history(require_data(r, "a history selector"), hs, model.lags());
}

Truncation load_truncation(const Run& r) {
  Truncation t;
  if (!r.run.contains("truncation")) return t;
  const Json& j = r.run.at("truncation");
  t.max_total_degree = integer(j, "max_total_degree", "run.truncation", t.max_total_degree);
  t.max_active = integer(j, "max_active", "run.truncation", t.max_active);
  return t;
}

std::size_t paths(const Run& r) {
  const Json& s = need(r.run, "S", "run");
  if (!s.is_number_integer() || s.get<long long>() < 2) schema("run.S must be an integer >= 2");
  return s.get<std::size_t>();
}

int horizon(const Run& r) {
  const int h = integer(r.run, "h", "run");
  if (h < 1) schema("run.h must be >= 1");
  return h;
}

std::vector<PartitionSpec> load_partitions(const Run& r) {
  if (!r.run.contains("partitions"))
    return {{"linear", select::Linear{}}, {"nonlinear", select::Nonlinear{}}};
  return partitions_from_json(r.run.at("partitions"));
}

// Linear contribution, in total and per shock, at each forecast horizon.
std::string linear_by_horizon(const ModelSpec& model, const History& history, int horizons, std::size_t S,
                              std::uint64_t seed) {
  const int n = model.dimension();
  std::vector<PartitionSpec> parts{{"linear", select::Linear{}}};
  for (int j = 0; j < n; ++j)
    parts.push_back({"linear_e" + std::to_string(j + 1), select::Marginal{j, 1}});
  std::ostringstream os;
  os << "horizon,component,source,contribution,se,total,share\n";
  for (int hz = 1; hz <= horizons; ++hz) {
    const DecompositionReport rep = decompose(model, history, hz, S, seed, Truncation{1, 1}, parts);
    for (const auto& p : rep.partitions)
      for (int i = 0; i < n; ++i)
        os << hz << ',' << i + 1 << ',' << p.name << ',' << format(p.matrix(i, i)) << ',' << format(p.se(i)) << ','
           << format(rep.total(i, i)) << ',' << (p.share.size() ? format(p.share(i)) : "") << '\n';
  }
  return os.str();
}

void write_decomposition(const Run& r, const DecompositionReport& report) {
  Json j;
  j["command"] = r.command;
  const Json body = to_json(report);
  for (const auto& [k, v] : body.items()) j[k] = v;
  r.write("report.json", dump_json(j));
  r.write("shares.csv", shares_csv(report));
  r.write("partitions.csv", partitions_csv(report));
  if (r.data) r.write("data.csv", dataset_csv(*r.data));
}

void cmd_decompose(const Run& r) {
  const ModelSpec model = load_model(r);
  const History history = load_history(r, model);
  const int h = horizon(r);
  const std::size_t S = paths(r);
  const DecompositionReport report = decompose(model, history, h, S, r.seed, load_truncation(r), load_partitions(r));
  write_decomposition(r, report);
  const int horizons = integer(r.run, "plot_horizons", "run", h);
  if (horizons > 0) r.write("linear_by_horizon.csv", linear_by_horizon(model, history, horizons, S, r.seed));
}

PolyFamily load_family(const Run& r, const Json& f, const ModelSpec& model, int j, int fallback_degree) {
  const std::string where = "run.families[" + std::to_string(j + 1) + "]";
  if (f.contains("file")) return poly_family_from_json(read_json(r.resolve(text(f, "file", where))));
  const PolyKind kind = poly_kind_from_string(text(f, "kind", where));
  const int degree = integer(f, "degree", where, fallback_degree);
  if (kind != PolyKind::empirical)
    return classical_family(kind, degree, real(f, "alpha", where, 0.0), real(f, "beta", where, 0.0));
  if (model.innovations().is_gaussian()) schema(where + " is empirical but the model innovations are Gaussian");
  const auto sample = model.innovations().distributions().at(static_cast<std::size_t>(j)).sorted();
  std::optional<int> order;
  if (f.contains("max_moment_order")) order = integer(f, "max_moment_order", where);
  return gram_schmidt_family(sample, degree, order);
}

void cmd_ofevd(const Run& r) {
  const ModelSpec model = load_model(r);
  const History history = load_history(r, model);
  const Truncation trunc = load_truncation(r);
  const Json& fj = need(r.run, "families", "run");
  if (!fj.is_array() || fj.size() != static_cast<std::size_t>(model.dimension()))
    schema("run.families needs one entry per model component");
  std::vector<PolyFamily> families;
  for (std::size_t j = 0; j < fj.size(); ++j)
    families.push_back(load_family(r, fj[j], model, static_cast<int>(j), trunc.max_total_degree));
  const DecompositionReport report =
      ofevd(model, history, horizon(r), paths(r), r.seed, families, trunc, load_partitions(r));
  write_decomposition(r, report);
  Json fam = Json::array();
  for (const auto& f : families) fam.push_back(to_json(f));
  r.write("families.json", dump_json(fam));
}

ShockSpec load_shock(const Run& r) {
  const Json& s = need(r.run, "shock", "run");
  ShockSpec shock;
  shock.component = component(s, "component", "run.shock");
  shock.magnitude = real(s, "magnitude", "run.shock", 1.0);
  const std::string kind = text(s, "kind", "run.shock", "additive");
  if (kind == "additive") shock.kind = ShockKind::additive;
  else if (kind == "pegged") shock.kind = ShockKind::pegged;
  else if (kind == "mit") shock.kind = ShockKind::mit;
  else schema("run.shock.kind must be 'additive', 'pegged' or 'mit'");
  return shock;
}

Json run_metadata(const Run& r, const ModelSpec& model, const History& history) {
  Json meta;
  meta["model"] = model.name();
  Json theta = Json::object();
  for (const auto& p : model.theta()) theta[p.name] = p.value;
  meta["theta"] = std::move(theta);
  meta["history"] = to_json(history.matrix());
  meta["seed"] = r.seed;
  return meta;
}

void cmd_irf(const Run& r) {
  const ModelSpec model = load_model(r);
  const History history = load_history(r, model);
  const ShockSpec shock = load_shock(r);
  const int h = horizon(r);
  const std::size_t S = shock.kind == ShockKind::mit ? 0 : paths(r);
  const IrfPath path = irf_path(model, history, h, shock, S, r.seed);

  const std::string kind = r.run.at("shock").value("kind", std::string("additive"));
  Json meta = run_metadata(r, model, history);
  meta["h"] = h;
  meta["S"] = S;
  meta["shock"] = {{"component", shock.component + 1}, {"magnitude", shock.magnitude}, {"kind", kind}};
  Json j;
  j["command"] = r.command;
  j["metadata"] = std::move(meta);
  j["irf"] = to_json(path);
  j["warnings"] = model.warnings();
  r.write("report.json", dump_json(j));

  std::ostringstream os;
  os << "# model=" << model.name() << "\n# seed=" << r.seed << "\n# S=" << S << "\n# shock=" << kind
     << " component " << shock.component + 1 << " magnitude " << format(shock.magnitude) << '\n';
  os << "horizon,component,response,se\n";
  for (Eigen::Index t = 0; t < path.mean.rows(); ++t)
    for (Eigen::Index i = 0; i < path.mean.cols(); ++i)
      os << t + 1 << ',' << i + 1 << ',' << format(path.mean(t, i)) << ',' << format(path.se(t, i)) << '\n';
  r.write("irf.csv", os.str());
}

void cmd_fit_tvar(const Run& r) {
  const Dataset& data = require_data(r, "fit-tvar");
  const int trigger = r.run.contains("trigger") ? component(r.run, "trigger", "run") : 0;
  const Json grid_cfg = r.run.value("grid", Json::object());
  TvarOptions opt;
  opt.intercept = r.run.value("intercept", true);
  opt.min_regime_frac = real(grid_cfg, "min_frac", "run.grid", opt.min_regime_frac);
  const std::string criterion = text(r.run, "criterion", "run", "aic_min");
  if (criterion == "aic_max") opt.minimize_aic = false;
  else if (criterion != "aic_min") schema("run.criterion must be 'aic_min' or 'aic_max'");
  const auto grid =
      threshold_grid(data.values, trigger, integer(grid_cfg, "points", "run.grid", 50), opt.min_regime_frac);
  const TvarFit fit = tvar_fit(data.values, trigger, grid, opt);

  const Json fj = to_json(fit);
  r.write("fit.json", dump_json(fj));
  Json j;
  j["command"] = r.command;
  j["data"] = {{"rows", data.values.rows()},
               {"columns", data.names},
               {"first", data.dates.front()},
               {"last", data.dates.back()}};
  j["fit"] = fj;
  r.write("report.json", dump_json(j));
  std::ostringstream os;
  os << "threshold,feasible,log_likelihood,aic\n";
  for (const auto& p : fit.trace)
    os << format(p.threshold) << ',' << (p.feasible ? 1 : 0) << ','
       << (p.feasible ? format(p.log_likelihood) : "") << ',' << (p.feasible ? format(p.aic) : "") << '\n';
  r.write("criterion.csv", os.str());
  r.write("data.csv", dataset_csv(data));
}

void cmd_simulate(const Run& r) {
  const ModelSpec model = load_model(r);
  // Without data or an explicit history the simulation starts from zeros.
  const History history = r.run.contains("history") || r.data
                              ? load_history(r, model)
                              : History(Eigen::MatrixXd::Zero(model.lags(), model.dimension()));
  const int T = integer(r.run, "T", "run");
  const int burn = integer(r.run, "burn_in", "run", 0);
  if (T < 1 || burn < 0) schema("run.T must be >= 1 and run.burn_in >= 0");
  const Eigen::MatrixXd series =
      simulate_series(model, history, static_cast<std::size_t>(T + burn), r.seed).bottomRows(T);

  Dataset out;
  out.values = series;
  if (r.run.contains("names")) {
    out.names = r.run.at("names").get<std::vector<std::string>>();
    if (out.names.size() != static_cast<std::size_t>(model.dimension()))
      schema("run.names needs one name per model component");
  } else {
    for (int j = 0; j < model.dimension(); ++j) out.names.push_back("y" + std::to_string(j + 1));
  }
  for (int t = 0; t < T; ++t) out.dates.push_back(std::to_string(t + 1));
  r.write("data.csv", dataset_csv(out));

  Json j;
  j["command"] = r.command;
  Json meta = run_metadata(r, model, history);
  meta["T"] = T;
  meta["burn_in"] = burn;
  j["metadata"] = std::move(meta);
  j["warnings"] = model.warnings();
  r.write("report.json", dump_json(j));
}

void write_error(const fs::path& out, const std::string& code, const std::string& module, const std::string& msg) {
  Json j;
  j["error"] = {{"code", code}, {"module", module}, {"message", msg}};
  try {
    fs::create_directories(out);
    write_file_atomic(out / "error.json", dump_json(j));
  } catch (...) {
    // stderr still carries the code.
  }
}

}  // namespace

std::vector<PartitionSpec> partitions_from_json(const Json& partitions) {
  if (!partitions.is_array()) schema("run.partitions must be an array");
  std::vector<PartitionSpec> out;
  for (const Json& p : partitions) {
    const std::string type = text(p, "type", "partition");
    const std::string where = "partition '" + type + "'";
    PartitionSpec spec;
    spec.name = text(p, "name", where, type);
    if (type == "linear") {
      spec.selector = select::Linear{};
    } else if (type == "nonlinear") {
      spec.selector = select::Nonlinear{};
    } else if (type == "marginal") {
      spec.selector = select::Marginal{component(p, "component", where), integer(p, "max_degree", where, 0)};
    } else if (type == "specific") {
      select::Specific s{component(p, "component", where), std::nullopt, integer(p, "degree", where, 1)};
      if (p.contains("horizon")) {
        const int hz = integer(p, "horizon", where);
        if (hz < 1) schema(where + ".horizon is 1-based and must be >= 1");
        s.horizon = hz - 1;
      }
      spec.selector = s;
    } else if (type == "joint_interaction") {
      spec.selector = select::JointInteraction{component(p, "component", where)};
    } else if (type == "isakin_ngo") {
      spec.selector = select::IsakinNgo{component(p, "component", where)};
    } else if (type == "interaction") {
      spec.selector = select::Interaction{component(p, "component1", where), integer(p, "degree1", where, 1),
                                          component(p, "component2", where), integer(p, "degree2", where, 1),
                                          integer(p, "lag", where, 0)};
    } else if (type == "explicit") {
      select::Explicit e;
      for (const Json& k : need(p, "indices", where)) e.indices.emplace_back(k.get<std::vector<int>>());
      spec.selector = std::move(e);
    } else {
      schema("unknown partition type '" + type + "'");
    }
    out.push_back(std::move(spec));
  }
  return out;
}

void run_config(const std::string& command, const Json& config, const fs::path& base_dir, const fs::path& out_dir) {
  try {
    Run r;
    r.command = command;
    r.cfg = config;
    r.base = base_dir;
    r.out = out_dir;
    if (!config.is_object()) schema("config must be a JSON object");
    if (integer(config, "version", "config") != kConfigVersion)
      schema("config version must be " + std::to_string(kConfigVersion));
    const Json& seed = need(config, "seed", "config");
    if (!seed.is_number_unsigned()) schema("config.seed must be a nonnegative integer");
    r.seed = seed.get<std::uint64_t>();
    r.run = config.value("run", Json::object());

    load_data(r);
    fs::create_directories(r.out);
    if (command == "decompose") cmd_decompose(r);
    else if (command == "ofevd") cmd_ofevd(r);
    else if (command == "irf") cmd_irf(r);
    else if (command == "fit-tvar") cmd_fit_tvar(r);
    else if (command == "simulate") cmd_simulate(r);
    else schema("unknown command '" + command + "'");
  } catch (const Json::exception& e) {
    schema(std::string("config: ") + e.what());
  }
}

fs::path run_command(const CliOptions& options) {
  Json config = read_json(options.config);
  if (options.seed) {
    if (!config.is_object()) schema("config must be a JSON object");
    config["seed"] = *options.seed;
  }
  const fs::path base = options.config.parent_path();
  fs::path out = fs::current_path();
  if (options.out) {
    out = *options.out;
  } else if (config.is_object() && config.contains("output")) {
    const std::string dir = text(config.at("output"), "dir", "output", ".");
    out = fs::path(dir).is_absolute() ? fs::path(dir) : base / dir;
  }
  if (options.threads) set_thread_count(*options.threads);
  run_config(options.command, config, base, out);
  return out;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Hermite and orthogonal-polynomial forecast error variance decompositions"};
  app.name("hfevd");
  CliOptions opt;
  app.add_option("command", opt.command, "decompose | ofevd | irf | fit-tvar | simulate")
      ->required()
      ->check(CLI::IsMember({"decompose", "ofevd", "irf", "fit-tvar", "simulate"}));
  app.add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "overrides the config seed");
  app.add_option("--out", opt.out, "output directory (default: config output.dir or the working directory)");
  app.add_option("--threads", opt.threads, "worker threads (fallback: HFEVD_THREADS)")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  fs::path out = opt.out.value_or(fs::current_path());
  try {
    out = run_command(opt);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error [" << e.qualified_code() << "]: " << e.what() << '\n';
    write_error(out, e.qualified_code(), e.module(), e.what());
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << '\n';
    write_error(out, "cli.internal", "cli", e.what());
  }
  return 1;
}

}  // namespace hfevd
