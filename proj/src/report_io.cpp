#include "hfevd/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hfevd/error.hpp"

namespace hfevd {

namespace {

void write_number(std::ostream& os, double v) {
  if (!std::isfinite(v)) {
    os << "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

bool is_flat(const Json& j) {
  for (const auto& e : j)
    if (e.is_array() || e.is_object()) return false;
  return true;
}

void write_value(std::ostream& os, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      write_number(os, j.get<double>());
      break;
    case Json::value_t::array:
      if (j.empty()) {
        os << "[]";
      } else if (is_flat(j)) {
        os << '[';
        bool first = true;
        for (const auto& e : j) {
          if (!first) os << ", ";
          first = false;
          write_value(os, e, depth + 1);
        }
        os << ']';
      } else {
        os << "[\n";
        bool first = true;
        for (const auto& e : j) {
          if (!first) os << ",\n";
          first = false;
          os << pad;
          write_value(os, e, depth + 1);
        }
        os << '\n' << close << ']';
      }
      break;
    case Json::value_t::object:
      if (j.empty()) {
        os << "{}";
      } else {
        os << "{\n";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
          if (!first) os << ",\n";
          first = false;
          os << pad << Json(key).dump() << ": ";
          write_value(os, value, depth + 1);
        }
        os << '\n' << close << '}';
      }
      break;
    default:
      os << j.dump();
  }
}

Json theta_json(const std::vector<NamedValue>& theta) {
  Json t = Json::object();
  for (const auto& p : theta) t[p.name] = p.value;
  return t;
}

const Json& require(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw Error("io", Errc::schema, what + " is missing field '" + key + "'");
  return j.at(key);
}

RegimeFit regime_from_json(const Json& j, const std::string& what) {
  RegimeFit r;
  r.A = matrix_from_json(require(j, "A", what), what + ".A");
  r.c = vector_from_json(require(j, "c", what), what + ".c");
  r.D = matrix_from_json(require(j, "D", what), what + ".D");
  r.sigma = matrix_from_json(require(j, "sigma", what), what + ".sigma");
  if (j.contains("A_se")) r.A_se = matrix_from_json(j.at("A_se"), what + ".A_se");
  if (j.contains("c_se")) r.c_se = vector_from_json(j.at("c_se"), what + ".c_se");
  if (j.contains("observations")) r.observations = j.at("observations").get<std::size_t>();
  if (j.contains("log_likelihood")) r.log_likelihood = j.at("log_likelihood").get<double>();
  return r;
}

Json regime_json(const RegimeFit& r, const char* rule) {
  Json j;
  j["rule"] = rule;
  j["observations"] = r.observations;
  j["A"] = to_json(r.A);
  j["A_se"] = to_json(r.A_se);
  j["c"] = to_json(r.c);
  j["c_se"] = to_json(r.c_se);
  j["sigma"] = to_json(r.sigma);
  j["D"] = to_json(r.D);
  j["log_likelihood"] = r.log_likelihood;
  return j;
}

}  // namespace

std::string dump_json(const Json& value) {
  std::ostringstream os;
  write_value(os, value, 0);
  os << '\n';
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("io", Errc::io, "cannot open " + tmp.string() + " for writing");
    os << contents;
    os.flush();
    if (!os) throw Error("io", Errc::io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("io", Errc::io, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Json to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw Error("io", Errc::schema, what + " must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j.front().is_array()) throw Error("io", Errc::schema, what + " must be an array of rows");
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error("io", Errc::schema, what + " rows must all have the same length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw Error("io", Errc::schema, what + " must contain numbers");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) throw Error("io", Errc::schema, what + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error("io", Errc::schema, what + " must contain numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json to_json(const DecompositionReport& r) {
  const IndexLayout layout{static_cast<int>(r.total.rows()), r.metadata.h};
  Json j;
  Json meta;
  meta["model"] = r.metadata.model_id;
  meta["theta"] = theta_json(r.metadata.theta);
  meta["history"] = to_json(r.metadata.history);
  meta["h"] = r.metadata.h;
  meta["S"] = r.metadata.S;
  meta["seed"] = r.metadata.seed;
  meta["basis"] = r.metadata.basis;
  meta["index_set"] = r.metadata.index_set;
  meta["index_layout"] = "position = component * h + horizon (component blocks outermost)";
  j["metadata"] = std::move(meta);
  j["total"] = to_json(r.total);
  j["total_se"] = to_json(r.total_se);
  j["residual"] = to_json(r.residual);
  j["residual_trace_se"] = r.residual_trace_se;
  j["degenerate"] = r.degenerate;
  Json parts = Json::array();
  for (const auto& p : r.partitions) {
    Json pj;
    pj["name"] = p.name;
    pj["size"] = p.members.size();
    pj["matrix"] = to_json(p.matrix);
    pj["se"] = to_json(p.se);
    pj["share"] = to_json(p.share);
    parts.push_back(std::move(pj));
  }
  j["partitions"] = std::move(parts);
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json ej;
    ej["index"] = e.index.degrees();
    ej["label"] = e.index.label(layout);
    ej["coeff"] = to_json(e.coeff);
    ej["coeff_se"] = to_json(e.coeff_se);
    ej["matrix"] = to_json(e.matrix);
    ej["matrix_se"] = to_json(e.matrix_se);
    ej["share"] = to_json(e.share);
    entries.push_back(std::move(ej));
  }
  j["entries"] = std::move(entries);
  j["warnings"] = r.warnings;
  return j;
}

std::string shares_csv(const DecompositionReport& r) {
  const IndexLayout layout{static_cast<int>(r.total.rows()), r.metadata.h};
  std::ostringstream os;
  os << "index,label,component,contribution,share\n";
  char buf[64];
  for (const auto& e : r.entries) {
    for (Eigen::Index i = 0; i < e.matrix.rows(); ++i) {
      os << '"' << e.index.to_string() << "\"," << e.index.label(layout) << ',' << i + 1 << ',';
      std::snprintf(buf, sizeof buf, "%.17g", e.matrix(i, i));
      os << buf << ',';
      if (e.share.size()) {
        std::snprintf(buf, sizeof buf, "%.17g", e.share(i));
        os << buf;
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string partitions_csv(const DecompositionReport& r) {
  std::ostringstream os;
  os << "partition,component,contribution,se,share\n";
  char buf[64];
  for (const auto& p : r.partitions) {
    for (Eigen::Index i = 0; i < p.matrix.rows(); ++i) {
      os << p.name << ',' << i + 1;
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", p.matrix(i, i), p.se(i));
      os << buf;
      if (p.share.size()) {
        std::snprintf(buf, sizeof buf, "%.17g", p.share(i));
        os << buf;
      }
      os << '\n';
    }
  }
  return os.str();
}

Json to_json(const TvarFit& fit) {
  Json j;
  j["model"] = "tvar";
  j["trigger"] = fit.trigger + 1;
  j["threshold"] = fit.threshold;
  Json opt;
  opt["intercept"] = fit.options.intercept;
  opt["minimize_aic"] = fit.options.minimize_aic;
  opt["min_regime_frac"] = fit.options.min_regime_frac;
  j["options"] = std::move(opt);
  j["parameters"] = fit.parameters;
  j["log_likelihood"] = fit.log_likelihood;
  j["aic"] = fit.aic;
  Json regimes;
  regimes["upper"] = regime_json(fit.upper, "lagged trigger >= threshold");
  regimes["lower"] = regime_json(fit.lower, "lagged trigger < threshold");
  j["regimes"] = std::move(regimes);
  Json trace = Json::array();
  for (const auto& p : fit.trace) {
    Json pj;
    pj["threshold"] = p.threshold;
    pj["feasible"] = p.feasible;
    pj["log_likelihood"] = p.feasible ? Json(p.log_likelihood) : Json(nullptr);
    pj["aic"] = p.feasible ? Json(p.aic) : Json(nullptr);
    trace.push_back(std::move(pj));
  }
  j["trace"] = std::move(trace);
  return j;
}

TvarFit tvar_fit_from_json(const Json& j) {
  const std::string what = "fit";
  if (require(j, "model", what).get<std::string>() != "tvar")
    throw Error("io", Errc::schema, "fit file does not describe a TVAR model");
  TvarFit fit;
  fit.trigger = require(j, "trigger", what).get<int>() - 1;
  fit.threshold = require(j, "threshold", what).get<double>();
  const auto& regimes = require(j, "regimes", what);
  fit.upper = regime_from_json(require(regimes, "upper", "fit.regimes"), "fit.regimes.upper");
  fit.lower = regime_from_json(require(regimes, "lower", "fit.regimes"), "fit.regimes.lower");
  if (j.contains("options")) {
    const auto& o = j.at("options");
    fit.options.intercept = o.value("intercept", true);
    fit.options.minimize_aic = o.value("minimize_aic", true);
    fit.options.min_regime_frac = o.value("min_regime_frac", 0.15);
  }
  fit.parameters = j.value("parameters", 0);
  if (j.contains("log_likelihood") && j.at("log_likelihood").is_number()) fit.log_likelihood = j.at("log_likelihood");
  if (j.contains("aic") && j.at("aic").is_number()) fit.aic = j.at("aic");
  if (j.contains("trace")) {
    for (const auto& p : j.at("trace")) {
      CriterionPoint c;
      c.threshold = p.at("threshold").get<double>();
      c.feasible = p.at("feasible").get<bool>();
      if (c.feasible) {
        c.log_likelihood = p.at("log_likelihood").get<double>();
        c.aic = p.at("aic").get<double>();
      }
      fit.trace.push_back(c);
    }
  }
  return fit;
}

Json to_json(const PolyFamily& f) {
  Json j;
  j["kind"] = std::string(to_string(f.kind));
  j["alpha"] = f.alpha;
  j["beta"] = f.beta;
  j["max_degree"] = f.max_degree();
  j["coefficients"] = f.coefficients;
  j["second_moments"] = f.second_moments;
  return j;
}

PolyFamily poly_family_from_json(const Json& j) {
  PolyFamily f;
  f.kind = poly_kind_from_string(require(j, "kind", "family").get<std::string>());
  f.alpha = j.value("alpha", 0.0);
  f.beta = j.value("beta", 0.0);
  f.coefficients = require(j, "coefficients", "family").get<std::vector<std::vector<double>>>();
  f.second_moments = require(j, "second_moments", "family").get<std::vector<double>>();
  if (f.coefficients.empty() || f.coefficients.size() != f.second_moments.size())
    throw Error("io", Errc::schema, "family coefficients and second moments must have matching lengths");
  return f;
}

Json to_json(const IrfPath& path) {
  Json j;
  j["mean"] = to_json(path.mean);
  j["se"] = to_json(path.se);
  return j;
}

}  // namespace hfevd
