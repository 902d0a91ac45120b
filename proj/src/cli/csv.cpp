#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hetbias/cli.hpp"
#include "hetbias/errors.hpp"

namespace hetbias::cli {

namespace {

// Splits one CSV record, honouring quotes (with "" escapes) and quoted line
// breaks. Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else {
      field += c;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool blank_line(const std::vector<std::string>& fields) {
  return fields.size() == 1 && trim(fields[0]).empty();
}

}  // namespace

CsvTable read_csv_table(std::istream& in, const RunConfig& config) {
  config.validate();
  std::vector<std::string> header;
  if (!read_record(in, header)) throw SchemaError("CSV input is empty (no header row)");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  for (auto& h : header) h = trim(h);

  CsvTable table;
  table.names.push_back(config.dep);
  table.names.insert(table.names.end(), config.regressors.begin(), config.regressors.end());
  std::vector<std::size_t> index;
  for (const auto& name : table.names) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("unknown column '" + name + "' (not in CSV header)");
    index.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<bool> take_log(table.names.size(), false);
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    take_log[j] = std::find(config.log_columns.begin(), config.log_columns.end(), table.names[j]) !=
                  config.log_columns.end();
  }

  table.columns.assign(table.names.size(), {});
  std::vector<std::string> fields;
  std::vector<double> row(table.names.size());
  while (read_record(in, fields)) {
    if (blank_line(fields)) continue;
    ++table.input_rows;
    bool complete = true;
    for (std::size_t j = 0; j < index.size() && complete; ++j) {
      const auto value = index[j] < fields.size() ? parse_number(fields[index[j]]) : std::nullopt;
      if (value) {
        row[j] = *value;
      } else {
        complete = false;
      }
    }
    if (!complete) {
      ++table.dropped_missing;
      continue;
    }
    bool in_domain = true;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!take_log[j]) continue;
      if (row[j] <= 0.0) {
        in_domain = false;
        break;
      }
      row[j] = std::log(row[j]);
    }
    if (!in_domain) {
      ++table.dropped_log;
      continue;
    }
    for (std::size_t j = 0; j < row.size(); ++j) table.columns[j].push_back(row[j]);
  }
  return table;
}

CsvTable read_csv_table(const std::string& path, const RunConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_csv_table(in, config);
}

ParsedCsv parse_csv(const std::string& path, const RunConfig& config) {
  CsvTable table = read_csv_table(path, config);
  const std::size_t k = config.regressors.size() + 1;
  if (table.rows() < k + 4) {
    throw InsufficientDataError("only " + std::to_string(table.rows()) + " usable rows of " +
                                std::to_string(table.input_rows) + " (" +
                                std::to_string(table.dropped_missing) + " missing, " +
                                std::to_string(table.dropped_log) + " outside the log domain); need at least " +
                                std::to_string(k + 4));
  }
  const auto n = static_cast<Eigen::Index>(table.rows());
  Matrix X(n, static_cast<Eigen::Index>(config.regressors.size()));
  for (std::size_t j = 0; j < config.regressors.size(); ++j) {
    X.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Vector>(table.columns[j + 1].data(), n);
  }
  Vector y = Eigen::Map<const Vector>(table.columns[0].data(), n);
  Dataset data = make_dataset(config.regressors, std::move(X), std::move(y));
  return {std::move(data), std::move(table)};
}

void RunConfig::validate() const {
  if (dep.empty()) throw SchemaError("no dependent variable given");
  if (regressors.empty()) throw SchemaError("no regressors given");
  std::set<std::string> seen;
  for (const auto& r : regressors) {
    if (r == dep) throw SchemaError("dependent variable '" + dep + "' is also listed as a regressor");
    if (!seen.insert(r).second) throw SchemaError("regressor '" + r + "' listed twice");
  }
  for (const auto& c : log_columns) {
    if (c != dep && !seen.count(c)) {
      throw SchemaError("log column '" + c + "' is neither the dependent variable nor a regressor");
    }
  }
  if (bootstrap_B < kMinBootstrapResamples) {
    throw ParameterError("--b must be >= " + std::to_string(kMinBootstrapResamples));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("--alpha must lie in (0, 1)");
  if (!(critical_value > 0.0)) throw ParameterError("--critical must be > 0");
}

}  // namespace hetbias::cli
