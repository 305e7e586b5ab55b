#include "hfevd/registry.hpp"

#include "hfevd/error.hpp"
#include "hfevd/models.hpp"

namespace hfevd {

namespace {

const Json& field(const Json& params, const char* key, const std::string& model) {
  if (!params.is_object() || !params.contains(key))
    throw Error("registry", Errc::schema, model + " needs parameter '" + key + "'");
  return params.at(key);
}

double number(const Json& params, const char* key, const std::string& model) {
  const Json& v = field(params, key, model);
  if (!v.is_number()) throw Error("registry", Errc::schema, model + " parameter '" + key + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& params, const char* key, double fallback, const std::string& model) {
  return params.is_object() && params.contains(key) ? number(params, key, model) : fallback;
}

Eigen::MatrixXd matrix(const Json& params, const char* key, const std::string& model) {
  return matrix_from_json(field(params, key, model), model + "." + key);
}

StochasticVolatilityParams sv_params(const Json& params, const std::string& model) {
  StochasticVolatilityParams p;
  p.a = number_or(params, "a", p.a, model);
  p.b = number_or(params, "b", p.b, model);
  p.a1 = number_or(params, "a1", p.a1, model);
  p.a2 = number_or(params, "a2", p.a2, model);
  p.phi = number_or(params, "phi", p.phi, model);
  return p;
}

void register_builtins(ModelRegistry& r) {
  r.add("linear_svar", [](const Json& p, const InnovationKind& k) {
    const Eigen::MatrixXd A = matrix(p, "A", "linear_svar");
    const Eigen::MatrixXd D = p.contains("D") ? matrix(p, "D", "linear_svar")
                                              : Eigen::MatrixXd::Identity(A.rows(), A.rows()).eval();
    return make_linear_svar(A, D, k);
  });
  r.add("dar1", [](const Json& p, const InnovationKind& k) {
    return make_dar1(number(p, "phi", "dar1"), number_or(p, "alpha", 1.0, "dar1"), number(p, "beta", "dar1"), k);
  });
  r.add("sv_threshold", [](const Json& p, const InnovationKind& k) {
    return make_sv_threshold(sv_params(p, "sv_threshold")).with_innovations(k);
  });
  r.add("sv_smooth", [](const Json& p, const InnovationKind& k) {
    return make_sv_smooth(sv_params(p, "sv_smooth")).with_innovations(k);
  });
  r.add("tvar", [](const Json& p, const InnovationKind& k) {
    TvarParams t;
    t.A1 = matrix(p, "A1", "tvar");
    t.A2 = matrix(p, "A2", "tvar");
    t.D1 = matrix(p, "D1", "tvar");
    t.D2 = matrix(p, "D2", "tvar");
    if (p.contains("c1")) t.c1 = vector_from_json(p.at("c1"), "tvar.c1");
    if (p.contains("c2")) t.c2 = vector_from_json(p.at("c2"), "tvar.c2");
    t.threshold = number(p, "threshold", "tvar");
    t.trigger = static_cast<int>(number_or(p, "trigger", 1.0, "tvar")) - 1;
    return make_tvar(t, k);
  });
  r.add("quadratic_example", [](const Json& p, const InnovationKind& k) {
    return make_quadratic_example(number(p, "a", "quadratic_example"), number(p, "b", "quadratic_example"), k);
  });
}

}  // namespace

void ModelRegistry::add(const std::string& name, ModelFactory factory) { factories_[name] = std::move(factory); }

bool ModelRegistry::contains(const std::string& name) const { return factories_.contains(name); }

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, f] : factories_) out.push_back(name);
  return out;
}

ModelSpec ModelRegistry::build(const std::string& name, const Json& params, const InnovationKind& innovations) const {
  const auto it = factories_.find(name);
  if (it == factories_.end()) {
    std::string known;
    for (const auto& [n, f] : factories_) known += (known.empty() ? "" : ", ") + n;
    throw Error("registry", Errc::spec, "unknown model '" + name + "' (known: " + known + ")");
  }
  try {
    return it->second(params, innovations);
  } catch (const Json::exception& e) {
    throw Error("registry", Errc::schema, name + ": " + e.what());
  } catch (const Error& e) {
    if (e.module() != "io") throw;
    throw Error("registry", Errc::schema, name + ": " + e.what());
  }
}

ModelRegistry& ModelRegistry::defaults() {
  static ModelRegistry registry = [] {
    ModelRegistry r;
    register_builtins(r);
    return r;
  }();
  return registry;
}

}  // namespace hfevd
