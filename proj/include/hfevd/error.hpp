#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hfevd {

/// Error categories. Combined with the originating module they form the
/// machine-readable code surfaced by the CLI, e.g. "hermite.domain".
enum class Errc {
  dimension,
  domain,
  parameter,
  construction,
  explosion,
  data,
  moment,
  spec,
  rank,
  capability,
  decomposition,
  schema,
  selector,
  io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(std::string module, Errc code, const std::string& message);

  const std::string& module() const noexcept { return module_; }
  Errc code() const noexcept { return code_; }
  /// "<module>.<category>"
  std::string qualified_code() const;

 private:
  std::string module_;
  Errc code_;
};

}  // namespace hfevd
