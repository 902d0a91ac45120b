#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetbias/biastest.hpp"
#include "hetbias/regression.hpp"
#include "hetbias/simulate.hpp"

namespace hetbias::cli {

inline constexpr std::uint64_t kDefaultSeed = 20250801;
inline constexpr const char* kSchemaVersion = "1";

enum class OutputFormat { text, json };

OutputFormat parse_format(const std::string& s);
const char* to_string(OutputFormat f) noexcept;

struct RunConfig {
  std::string input_path;
  std::string dep;
  std::vector<std::string> regressors;
  std::vector<std::string> log_columns;
  std::size_t bootstrap_B = 1000;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::size_t> lag;
  double alpha = 0.05;
  double critical_value = 1.96;
  BpVariant bp_variant = BpVariant::levels;
  OutputFormat format = OutputFormat::text;
  unsigned threads = 0;

  /// Throws SchemaError for inconsistent column selections and ParameterError
  /// for out-of-range numeric settings.
  void validate() const;
};

/// Selected columns after listwise deletion and log transforms, plus counts of
/// what was removed.
struct CsvTable {
  std::vector<std::string> names;  // dep first, then regressors
  std::vector<std::vector<double>> columns;
  std::size_t input_rows = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_log = 0;

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t dropped_rows() const noexcept { return dropped_missing + dropped_log; }
};

/// Reads an RFC-4180 CSV with a header row. Rows with a blank or non-numeric
/// cell in any selected column are dropped; log columns are then transformed,
/// dropping rows with a non-positive value. Throws IoError or SchemaError.
CsvTable read_csv_table(const std::string& path, const RunConfig& config);
CsvTable read_csv_table(std::istream& in, const RunConfig& config);

struct ParsedCsv {
  Dataset data;
  CsvTable table;
};

/// read_csv_table plus Dataset construction. Throws InsufficientDataError when
/// fewer than k + 4 rows survive (k counts the intercept).
ParsedCsv parse_csv(const std::string& path, const RunConfig& config);

struct DiagnosticReport {
  RunConfig config;
  std::vector<std::string> coefficient_names;
  OlsFit ols;
  BpResult bp;
  std::optional<BiasTestReport> bias;
  std::string note;  // set when the bias test is undefined for this data
  std::size_t input_rows = 0;
  std::size_t analyzed_rows = 0;
  std::size_t dropped_missing = 0;
  std::size_t dropped_log = 0;

  std::size_t dropped_rows() const noexcept { return input_rows - analyzed_rows; }
};

/// OLS with HAC errors, Breusch-Pagan, and the bootstrap bias test on an
/// already-parsed dataset. A degenerate residual correlation is recorded in
/// `note` instead of thrown.
DiagnosticReport diagnose(const Dataset& data, const RunConfig& config);

std::string render_report(const DiagnosticReport& report, OutputFormat format);
std::string render_tables(Table table, const std::vector<CellSummary>& cells, OutputFormat format);

nlohmann::json report_json(const DiagnosticReport& report);
nlohmann::json tables_json(Table table, const std::vector<CellSummary>& cells);

/// Six significant digits, as used throughout the text renderers.
std::string format_real(double v);

struct SimulateConfig {
  std::string table;
  std::size_t reps = 500;
  std::size_t B = 200;
  std::uint64_t seed = kDefaultSeed;
  OutputFormat format = OutputFormat::text;
  unsigned threads = 0;
};

/// Exit codes: 0 ran (whatever the statistical verdict), 2 usage or data error.
int cmd_test(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (test | simulate | version) and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hetbias::cli
