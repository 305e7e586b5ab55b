#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hfevd/model.hpp"
#include "hfevd/report_io.hpp"

namespace hfevd {

/// Builds a model from a JSON parameter map and an innovation kind.
using ModelFactory = std::function<ModelSpec(const Json& params, const InnovationKind& innovations)>;

/// Name -> factory map used by configs. `defaults()` holds the built-in
/// families; user models are added with `add` and resolved the same way.
class ModelRegistry {
 public:
  /// Replaces any factory already registered under `name`.
  void add(const std::string& name, ModelFactory factory);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Throws registry.spec for an unknown name and registry.schema for a
  /// malformed parameter map.
  ModelSpec build(const std::string& name, const Json& params,
                  const InnovationKind& innovations = InnovationKind::gaussian()) const;

  /// linear_svar {A, D}, dar1 {phi, alpha, beta}, sv_threshold and
  /// sv_smooth {a, b, a1, a2, phi}, tvar {A1, A2, D1, D2, c1, c2,
  /// threshold, trigger (1-based)}, quadratic_example {a, b}.
  static ModelRegistry& defaults();

 private:
  std::map<std::string, ModelFactory> factories_;
};

}  // namespace hfevd
