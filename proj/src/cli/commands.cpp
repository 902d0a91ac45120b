#include <iostream>

#include <CLI11.hpp>

#include "hetbias/cli.hpp"
#include "hetbias/errors.hpp"
#include "hetbias/version.hpp"

namespace hetbias::cli {

DiagnosticReport diagnose(const Dataset& data, const RunConfig& config) {
  DiagnosticReport report;
  report.config = config;
  report.coefficient_names = data.column_names();
  report.input_rows = static_cast<std::size_t>(data.n());
  report.analyzed_rows = static_cast<std::size_t>(data.n());
  report.ols = ols_fit(data, config.lag);
  report.bp = breusch_pagan(data, report.ols, config.bp_variant);
  try {
    report.bias = bootstrap_bias_test(data, config.bootstrap_B, config.seed, config.critical_value,
                                      config.threads);
  } catch (const DegenerateCorrelationError& e) {
    report.note = e.what();
  }
  return report;
}

int cmd_test(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    const ParsedCsv parsed = parse_csv(config.input_path, config);
    DiagnosticReport report = diagnose(parsed.data, config);
    report.input_rows = parsed.table.input_rows;
    report.dropped_missing = parsed.table.dropped_missing;
    report.dropped_log = parsed.table.dropped_log;
    if (!report.note.empty()) err << "warning: " << report.note << "\n";
    out << render_report(report, config.format);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_simulate(const SimulateConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Table table = parse_table(config.table);
    if (config.reps < 1) throw ParameterError("--reps must be >= 1");
    const auto cells = run_table(table, config.reps, config.B, config.seed, config.threads);
    out << render_tables(table, cells, config.format);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heteroscedasticity-based test for OLS bias using LAD residual correlations"};
  app.require_subcommand(1);

  RunConfig test_cfg;
  std::string test_format = "text";
  std::string bp = "levels";
  std::size_t lag = 0;
  auto* test = app.add_subcommand("test", "Run OLS, Breusch-Pagan, and the bootstrap bias test on a CSV");
  test->add_option("--data", test_cfg.input_path, "CSV file with a header row")->required();
  test->add_option("--dep", test_cfg.dep, "Dependent variable column")->required();
  test->add_option("--regressors", test_cfg.regressors, "Regressor columns")->required()->delimiter(',');
  test->add_option("--log", test_cfg.log_columns, "Columns to natural-log transform")->delimiter(',');
  test->add_option("--b", test_cfg.bootstrap_B, "Bootstrap resamples")->capture_default_str();
  test->add_option("--seed", test_cfg.seed, "Bootstrap seed")->capture_default_str();
  auto* lag_opt = test->add_option("--lag", lag, "Newey-West lag (default floor(4 (n/100)^(2/9)))");
  test->add_option("--alpha", test_cfg.alpha, "Breusch-Pagan significance level")->capture_default_str();
  test->add_option("--critical", test_cfg.critical_value, "Critical |zstat|")->capture_default_str();
  test->add_option("--bp", bp, "Breusch-Pagan auxiliary design")
      ->check(CLI::IsMember({"levels", "squares"}))
      ->capture_default_str();
  test->add_option("--format", test_format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  test->add_option("--threads", test_cfg.threads, "Worker threads (0 = auto)")->capture_default_str();

  SimulateConfig sim_cfg;
  std::string sim_format = "text";
  auto* sim = app.add_subcommand("simulate", "Reproduce a simulation table");
  sim->add_option("table", sim_cfg.table, "table1 | table2 | table3 | delta5")->required();
  sim->add_option("--reps", sim_cfg.reps, "Replications per cell")->capture_default_str();
  sim->add_option("--b", sim_cfg.B, "Bootstrap resamples per replication")->capture_default_str();
  sim->add_option("--seed", sim_cfg.seed, "Table seed")->capture_default_str();
  sim->add_option("--format", sim_format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  sim->add_option("--threads", sim_cfg.threads, "Worker threads (0 = auto)")->capture_default_str();

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  if (version->parsed()) {
    out << "hetbias " << kVersion << "\n";
    return 0;
  }
  if (test->parsed()) {
    test_cfg.format = parse_format(test_format);
    test_cfg.bp_variant = parse_bp_variant(bp);
    if (lag_opt->count() > 0) test_cfg.lag = lag;
    return cmd_test(test_cfg, out, err);
  }
  sim_cfg.format = parse_format(sim_format);
  return cmd_simulate(sim_cfg, out, err);
}

}  // namespace hetbias::cli
