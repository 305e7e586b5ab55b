#include "hfevd/error.hpp"

namespace hfevd {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::dimension: return "dimension";
    case Errc::domain: return "domain";
    case Errc::parameter: return "parameter";
    case Errc::construction: return "construction";
    case Errc::explosion: return "explosion";
    case Errc::data: return "data";
    case Errc::moment: return "moment";
    case Errc::spec: return "spec";
    case Errc::rank: return "rank";
    case Errc::capability: return "capability";
    case Errc::decomposition: return "decomposition";
    case Errc::schema: return "schema";
    case Errc::selector: return "selector";
    case Errc::io: return "io";
  }
  return "unknown";
}

Error::Error(std::string module, Errc code, const std::string& message)
    : std::runtime_error(message), module_(std::move(module)), code_(code) {}

std::string Error::qualified_code() const {
  return module_ + "." + std::string(to_string(code_));
}

}  // namespace hfevd
