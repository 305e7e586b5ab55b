#include "hfevd/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hfevd/error.hpp"

namespace hfevd {

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error("cli", Errc::schema, "CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare newline (including a trailing one) is not a record.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw Error("cli", Errc::data, "stray quote on CSV line " + std::to_string(line));
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw Error("cli", Errc::data, "unterminated quoted CSV field");
  if (field_started || !record.empty()) end_record();

  if (records.empty()) throw Error("cli", Errc::data, "CSV is empty; a header row is required");
  CsvTable table;
  table.header = std::move(records.front());
  if (!table.header.empty() && table.header[0].starts_with("\xEF\xBB\xBF")) table.header[0].erase(0, 3);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw Error("cli", Errc::data,
                  "CSV record " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                      " fields, header has " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", Errc::io, "cannot open " + path.string());
  return parse_csv(in);
}

Transform transform_from_string(const std::string& name) {
  if (name == "none") return Transform::none;
  if (name == "rate_of_change") return Transform::rate_of_change;
  if (name == "first_difference") return Transform::first_difference;
  if (name == "log_difference") return Transform::log_difference;
  if (name == "ma_first_difference" || name == "ma2_first_difference") return Transform::ma_first_difference;
  throw Error("cli", Errc::schema, "unknown transformation '" + name + "'");
}

std::string_view to_string(Transform t) noexcept {
  switch (t) {
    case Transform::none: return "none";
    case Transform::rate_of_change: return "rate_of_change";
    case Transform::first_difference: return "first_difference";
    case Transform::log_difference: return "log_difference";
    case Transform::ma_first_difference: return "ma_first_difference";
  }
  return "none";
}

namespace {

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const auto first = cell.find_first_not_of(" \t");
  const auto last = cell.find_last_not_of(" \t");
  double v = 0.0;
  if (first != std::string::npos) {
    const char* b = cell.data() + first;
    const char* e = cell.data() + last + 1;
    if (*b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec == std::errc() && ptr == e && std::isfinite(v)) return v;
  }
  throw Error("cli", Errc::data,
              "row " + std::to_string(row + 1) + " column '" + column + "': '" + cell + "' is not a finite number");
}

// Index of the first defined output of the transform.
std::size_t lost_rows(const ColumnSpec& c) {
  switch (c.transform) {
    case Transform::none: return 0;
    case Transform::ma_first_difference: return static_cast<std::size_t>(c.window);
    default: return 1;
  }
}

std::vector<double> apply_transform(const std::vector<double>& x, const ColumnSpec& c) {
  const std::size_t T = x.size();
  std::vector<double> y(T, std::nan(""));
  auto positive = [&](std::size_t t) {
    if (!(x[t] > 0.0))
      throw Error("cli", Errc::data,
                  "row " + std::to_string(t + 1) + " column '" + c.name + "': " + std::string(to_string(c.transform)) +
                      " needs positive values");
  };
  switch (c.transform) {
    case Transform::none:
      y = x;
      break;
    case Transform::rate_of_change:
      for (std::size_t t = 1; t < T; ++t) {
        if (x[t - 1] == 0.0)
          throw Error("cli", Errc::data,
                      "row " + std::to_string(t) + " column '" + c.name + "': rate of change from a zero level");
        y[t] = x[t] / x[t - 1] - 1.0;
      }
      break;
    case Transform::first_difference:
      for (std::size_t t = 1; t < T; ++t) y[t] = x[t] - x[t - 1];
      break;
    case Transform::log_difference:
      for (std::size_t t = 0; t < T; ++t) positive(t);
      for (std::size_t t = 1; t < T; ++t) y[t] = std::log(x[t]) - std::log(x[t - 1]);
      break;
    case Transform::ma_first_difference: {
      const auto w = static_cast<std::size_t>(c.window);
      for (std::size_t t = w; t < T; ++t) {
        double s = 0.0;
        for (std::size_t k = 0; k < w; ++k) s += x[t - k] - x[t - k - 1];
        y[t] = s / static_cast<double>(w);
      }
      break;
    }
  }
  return y;
}

}  // namespace

Dataset transform_table(const CsvTable& table, const std::optional<std::string>& date_column,
                        const std::vector<ColumnSpec>& columns) {
  if (columns.empty()) throw Error("cli", Errc::schema, "data block lists no columns");
  if (table.rows.size() < 3)
    throw Error("cli", Errc::data, "CSV needs at least 3 data rows, found " + std::to_string(table.rows.size()));
  const std::size_t T = table.rows.size();

  std::size_t drop = 0;
  std::vector<std::vector<double>> series;
  for (const auto& c : columns) {
    if (c.transform == Transform::ma_first_difference && c.window < 1)
      throw Error("cli", Errc::schema, "moving-average window must be at least 1");
    const std::size_t j = table.column(c.name);
    std::vector<double> x(T);
    for (std::size_t t = 0; t < T; ++t) x[t] = parse_cell(table.rows[t][j], t, c.name);
    series.push_back(apply_transform(x, c));
    drop = std::max(drop, lost_rows(c));
  }
  if (drop >= T) throw Error("cli", Errc::data, "transformations leave no rows");

  Dataset out;
  const std::size_t rows = T - drop;
  out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.names.push_back(columns[j].name);
    for (std::size_t t = 0; t < rows; ++t)
      out.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = series[j][t + drop];
  }
  const std::optional<std::size_t> dcol =
      date_column ? std::optional<std::size_t>(table.column(*date_column)) : std::nullopt;
  for (std::size_t t = drop; t < T; ++t) out.dates.push_back(dcol ? table.rows[t][*dcol] : std::to_string(t + 1));
  return out;
}

Dataset ingest_csv(const std::filesystem::path& path, const std::optional<std::string>& date_column,
                   const std::vector<ColumnSpec>& columns) {
  return transform_table(read_csv(path), date_column, columns);
}

History select_history(const Dataset& data, const HistorySelector& selector, int lags) {
  const auto T = static_cast<std::size_t>(data.values.rows());
  if (T == 0) throw Error("cli", Errc::selector, "dataset is empty");
  std::size_t end = T - 1;
  switch (selector.kind) {
    case HistorySelector::Kind::last:
      break;
    case HistorySelector::Kind::row:
      if (selector.row >= T)
        throw Error("cli", Errc::selector,
                    "history row " + std::to_string(selector.row + 1) + " is beyond the " + std::to_string(T) +
                        " transformed rows");
      end = selector.row;
      break;
    case HistorySelector::Kind::date: {
      const auto it = std::find(data.dates.begin(), data.dates.end(), selector.date);
      if (it == data.dates.end()) throw Error("cli", Errc::selector, "no row dated '" + selector.date + "'");
      end = static_cast<std::size_t>(it - data.dates.begin());
      break;
    }
  }
  if (lags < 1 || end + 1 < static_cast<std::size_t>(lags))
    throw Error("cli", Errc::selector,
                "history needs " + std::to_string(lags) + " rows ending at row " + std::to_string(end + 1));
  Eigen::MatrixXd m(lags, data.values.cols());
  for (int l = 0; l < lags; ++l) m.row(l) = data.values.row(static_cast<Eigen::Index>(end) - l);
  return History(m);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + '"';
}

std::string dataset_csv(const Dataset& data) {
  std::ostringstream os;
  os << "date";
  for (const auto& n : data.names) os << ',' << csv_field(n);
  os << '\n';
  char buf[32];
  for (Eigen::Index t = 0; t < data.values.rows(); ++t) {
    os << csv_field(data.dates[static_cast<std::size_t>(t)]);
    for (Eigen::Index j = 0; j < data.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", data.values(t, j));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace hfevd
