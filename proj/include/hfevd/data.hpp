#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hfevd/model.hpp"

namespace hfevd {

/// RFC-4180 table: quoted fields may hold commas, newlines and doubled
/// quotes. The first record is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws cli.schema when the column is absent.
  std::size_t column(const std::string& name) const;
};

/// Throws cli.data on an unterminated quote or a ragged record.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

enum class Transform { none, rate_of_change, first_difference, log_difference, ma_first_difference };

Transform transform_from_string(const std::string& name);
std::string_view to_string(Transform t) noexcept;

struct ColumnSpec {
  std::string name;
  Transform transform = Transform::none;
  /// Trailing window of the moving average of first differences.
  int window = 3;
};

/// Transformed, top-aligned series with their date labels.
struct Dataset {
  std::vector<std::string> dates;
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // T x n
};

/// Applies per-column transformations. Rows where any transformed column is
/// undefined are dropped from the top so every column shares one index.
/// Throws cli.schema for a missing column and cli.data (naming the 1-based
/// data row) for non-numeric cells or nonpositive values under a ratio or
/// log transform. Requires at least 3 input rows.
Dataset transform_table(const CsvTable& table, const std::optional<std::string>& date_column,
                        const std::vector<ColumnSpec>& columns);

Dataset ingest_csv(const std::filesystem::path& path, const std::optional<std::string>& date_column,
                   const std::vector<ColumnSpec>& columns);

struct HistorySelector {
  enum class Kind { last, row, date } kind = Kind::last;
  std::size_t row = 0;  // 0-based row of the transformed data
  std::string date;
};

/// History of `lags` rows ending at the selected row, most recent first.
/// Throws cli.selector when the selection does not leave enough rows.
History select_history(const Dataset& data, const HistorySelector& selector, int lags);

/// Quotes a field when it holds a comma, quote or line break.
std::string csv_field(const std::string& s);

/// date,<names...> with %.17g values.
std::string dataset_csv(const Dataset& data);

}  // namespace hfevd
