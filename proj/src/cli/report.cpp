#include <algorithm>
#include <cstdio>
#include <sstream>

#include "hetbias/cli.hpp"
#include "hetbias/errors.hpp"

namespace hetbias::cli {

namespace {

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["data"] = c.input_path;
  j["dep"] = c.dep;
  j["regressors"] = c.regressors;
  j["log"] = c.log_columns;
  j["B"] = c.bootstrap_B;
  j["seed"] = c.seed;
  j["lag"] = c.lag ? nlohmann::json(*c.lag) : nlohmann::json(nullptr);
  j["alpha"] = c.alpha;
  j["critical_value"] = c.critical_value;
  j["bp_variant"] = to_string(c.bp_variant);
  return j;
}

nlohmann::json spec_json(const DgpSpec& s) {
  nlohmann::json j;
  j["family"] = to_string(s.family);
  j["n"] = s.n;
  j["hetero"] = s.hetero;
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  switch (s.family) {
    case DgpFamily::omitted:
      j["lambda"] = s.lambda;
      j["delta"] = s.delta;
      break;
    case DgpFamily::measurement:
      j["me"] = s.me;
      break;
    case DgpFamily::simultaneity:
      j["hetero_scale"] = s.sim.hetero_scale;
      j["sigma_demand"] = s.sim.sigma_demand;
      j["sigma_supply"] = s.sim.sigma_supply;
      break;
  }
  return j;
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

OutputFormat parse_format(const std::string& s) {
  if (s == "text") return OutputFormat::text;
  if (s == "json") return OutputFormat::json;
  throw UsageError("unknown format '" + s + "' (expected text|json)");
}

const char* to_string(OutputFormat f) noexcept { return f == OutputFormat::text ? "text" : "json"; }

nlohmann::json report_json(const DiagnosticReport& r) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "test";
  j["config"] = config_json(r.config);
  j["rows"] = {{"input", r.input_rows},
               {"analyzed", r.analyzed_rows},
               {"dropped", r.dropped_rows()},
               {"dropped_missing", r.dropped_missing},
               {"dropped_log_domain", r.dropped_log}};

  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t i = 0; i < r.coefficient_names.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    coefs.push_back({{"name", r.coefficient_names[i]},
                     {"estimate", r.ols.coefficients(e)},
                     {"hac_se", r.ols.hac_se(e)}});
  }
  j["ols"] = {{"coefficients", coefs},
              {"sigma2", r.ols.sigma2},
              {"r_squared", r.ols.r_squared},
              {"lag", r.ols.lag}};
  j["breusch_pagan"] = {{"variant", to_string(r.bp.variant)},
                        {"lm_stat", r.bp.lm_stat},
                        {"df", r.bp.df},
                        {"p_value", r.bp.p_value},
                        {"heteroscedastic", r.bp.p_value < r.config.alpha}};
  if (r.bias) {
    const auto& b = *r.bias;
    nlohmann::json lad_coefs = nlohmann::json::array();
    for (std::size_t i = 0; i < r.coefficient_names.size(); ++i) {
      lad_coefs.push_back({{"name", r.coefficient_names[i]},
                           {"estimate", b.lad.coefficients(static_cast<Eigen::Index>(i))}});
    }
    nlohmann::json stats = nlohmann::json::array();
    for (const auto& s : b.stats) {
      stats.push_back({{"name", s.name},
                       {"r", s.r},
                       {"z", s.z},
                       {"sigma_z_normal", s.sigma_z_normal},
                       {"sigma_z_boot", s.sigma_z_boot},
                       {"zstat_normal", s.zstat_normal},
                       {"zstat_boot", s.zstat_boot},
                       {"ci_lower", s.ci_lower},
                       {"ci_upper", s.ci_upper},
                       {"insignificant_fraction", s.insignificant_fraction},
                       {"biased", s.biased_decision}});
    }
    j["bias_test"] = {{"n", b.n},
                      {"B", b.B},
                      {"seed", b.seed},
                      {"critical_value", b.critical_value},
                      {"degenerate_resamples", b.degenerate_resamples},
                      {"lad",
                       {{"coefficients", lad_coefs},
                        {"objective", b.lad.objective},
                        {"iterations", b.lad.iterations},
                        {"converged", b.lad.converged}}},
                      {"regressors", stats}};
  } else {
    j["bias_test"] = nullptr;
  }
  j["note"] = r.note.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.note);
  return j;
}

nlohmann::json tables_json(Table table, const std::vector<CellSummary>& cells) {
  const TableLayout layout = table_layout(table);
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "simulate";
  j["table"] = to_string(table);
  j["title"] = layout.title;
  j["row_factor"] = layout.row_factor;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cells) {
    arr.push_back({{"row_level", c.row_level},
                   {"heteroscedasticity", c.col_level},
                   {"spec", spec_json(c.spec)},
                   {"reps", c.reps},
                   {"B", c.B},
                   {"seed", c.seed},
                   {"mean_b", c.mean_b},
                   {"mean_r", c.mean_r},
                   {"mean_zstat", c.mean_zstat},
                   {"sd_zstat", c.sd_zstat},
                   {"mean_zstat_normal", c.mean_zstat_normal},
                   {"mean_ols_b", c.mean_ols_b},
                   {"bp_reject_rate", c.bp_reject_rate},
                   {"degenerate_resamples", c.degenerate_resamples}});
  }
  j["cells"] = arr;
  return j;
}

std::string render_report(const DiagnosticReport& r, OutputFormat format) {
  if (format == OutputFormat::json) return report_json(r).dump(2) + "\n";

  std::ostringstream os;
  os << "Heteroscedastic OLS bias test\n";
  os << "data: " << r.config.input_path << "   dependent: " << r.config.dep << "\n";
  os << "rows: " << r.analyzed_rows << " analyzed of " << r.input_rows << " (dropped "
     << r.dropped_rows() << ": " << r.dropped_missing << " missing, " << r.dropped_log
     << " outside log domain)\n\n";

  os << "OLS coefficients (HAC Newey-West standard errors, Bartlett lag " << r.ols.lag << ")\n";
  os << "  " << pad("", 24) << pad("estimate", 14) << "hac_se\n";
  for (std::size_t i = 0; i < r.coefficient_names.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    os << "  " << pad(r.coefficient_names[i], 24) << pad(format_real(r.ols.coefficients(e)), 14)
       << format_real(r.ols.hac_se(e)) << "\n";
  }
  os << "  R-squared " << format_real(r.ols.r_squared) << "   sigma2 " << format_real(r.ols.sigma2)
     << "\n\n";

  os << "Breusch-Pagan (Koenker, " << to_string(r.bp.variant) << "): LM = " << format_real(r.bp.lm_stat)
     << ", df = " << r.bp.df << ", p = " << format_real(r.bp.p_value) << " -> "
     << (r.bp.p_value < r.config.alpha ? "heteroscedasticity confirmed" : "heteroscedasticity not confirmed")
     << " at alpha " << format_real(r.config.alpha) << "\n\n";

  if (!r.bias) {
    os << "Bias test: not computed. " << r.note << "\n";
    return os.str();
  }
  const auto& b = *r.bias;
  os << "Bias test (correlation of regressors with LAD residuals; pairs bootstrap B = " << b.B
     << ", seed = " << b.seed << ")\n";
  os << "  " << pad("regressor", 24) << pad("r", 13) << pad("z", 13) << pad("zstat_normal", 13)
     << pad("sigma_z_boot", 13) << pad("zstat", 13) << pad("ci_lower", 13) << pad("ci_upper", 13)
     << pad("insignif", 10) << "decision\n";
  for (const auto& s : b.stats) {
    os << "  " << pad(s.name, 24) << pad(format_real(s.r), 13) << pad(format_real(s.z), 13)
       << pad(format_real(s.zstat_normal), 13) << pad(format_real(s.sigma_z_boot), 13)
       << pad(format_real(s.zstat_boot), 13) << pad(format_real(s.ci_lower), 13)
       << pad(format_real(s.ci_upper), 13) << pad(format_real(s.insignificant_fraction), 10)
       << (s.biased_decision ? "bias probable" : "no bias detected") << "\n";
  }
  os << "  critical value " << format_real(b.critical_value) << "; degenerate resamples redrawn "
     << b.degenerate_resamples << "\n";
  os << "  LAD: objective " << format_real(b.lad.objective) << ", iterations " << b.lad.iterations
     << ", converged " << (b.lad.converged ? "yes" : "no") << "\n";
  return os.str();
}

std::string render_tables(Table table, const std::vector<CellSummary>& cells, OutputFormat format) {
  if (format == OutputFormat::json) return tables_json(table, cells).dump(2) + "\n";

  const TableLayout layout = table_layout(table);
  std::ostringstream os;
  os << layout.title << "\n";
  if (!cells.empty()) {
    os << "n = " << cells.front().spec.n << ", replications = " << cells.front().reps
       << ", bootstrap B = " << cells.front().B << "\n";
  }
  os << "\n";

  std::vector<std::string> rows;
  std::vector<std::string> cols;
  for (const auto& c : cells) {
    if (std::find(rows.begin(), rows.end(), c.row_level) == rows.end()) rows.push_back(c.row_level);
    if (std::find(cols.begin(), cols.end(), c.col_level) == cols.end()) cols.push_back(c.col_level);
  }
  const std::size_t label_w = std::max<std::size_t>(layout.row_factor.size() + 2, 28);
  const std::size_t cell_w = 26;
  os << pad("", label_w + 5) << "heteroscedasticity\n";
  os << pad("", label_w + 5);
  for (const auto& c : cols) os << pad(c, cell_w);
  os << "\n";

  auto find = [&](const std::string& row, const std::string& col) -> const CellSummary* {
    for (const auto& c : cells) {
      if (c.row_level == row && c.col_level == col) return &c;
    }
    return nullptr;
  };
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    const char* labels[] = {"b = ", "r = ", "zstat = ", "BP reject = "};
    for (int line = 0; line < 4; ++line) {
      const std::string factor = (ri == 0 && line == 0) ? layout.row_factor : "";
      os << pad(factor, label_w) << pad(line == 0 ? rows[ri] : "", 5);
      for (const auto& col : cols) {
        const CellSummary* c = find(rows[ri], col);
        std::string text;
        if (c) {
          const double v = line == 0 ? c->mean_b : line == 1 ? c->mean_r : line == 2 ? c->mean_zstat : c->bp_reject_rate;
          text = labels[line] + format_real(v);
        }
        os << pad(text, cell_w);
      }
      os << "\n";
    }
    os << "\n";
  }
  os << "b: mean LAD slope of the focal regressor; r: mean correlation with the LAD residuals;\n"
        "zstat: mean bootstrap zstat; BP reject: Breusch-Pagan (squares) rejection rate at 5%.\n";
  return os.str();
}

}  // namespace hetbias::cli
