#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "hfevd/decomposition.hpp"
#include "hfevd/estimation.hpp"
#include "hfevd/irf.hpp"
#include "hfevd/ortho_poly.hpp"

namespace hfevd {

using Json = nlohmann::ordered_json;

/// Serializes with insertion-ordered keys, two-space indentation and every
/// floating-point value printed as %.17g; non-finite values become null.
std::string dump_json(const Json& value);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

Json to_json(const Eigen::MatrixXd& m);
Json to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& what);
Eigen::VectorXd vector_from_json(const Json& j, const std::string& what);

Json to_json(const DecompositionReport& report);
/// index,label,component,contribution,share (one row per entry and component).
std::string shares_csv(const DecompositionReport& report);
/// partition,component,contribution,se,share.
std::string partitions_csv(const DecompositionReport& report);

Json to_json(const TvarFit& fit);
/// Rebuilds a fit (regimes, threshold, trigger, options) from to_json output.
TvarFit tvar_fit_from_json(const Json& j);

Json to_json(const PolyFamily& family);
PolyFamily poly_family_from_json(const Json& j);

Json to_json(const IrfPath& path);

}  // namespace hfevd
