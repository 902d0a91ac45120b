#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hetbias/biastest.hpp"

namespace hetbias {

enum class DgpFamily { omitted, measurement, simultaneity };

const char* to_string(DgpFamily f) noexcept;

/// Coefficients of the two-equation log-linear commodity market
///   demand: ln q = a_d + b_d ln p + income_coef income + sub_coef p_sub + comp_coef p_comp + u_d
///   supply: ln q = a_s + b_s ln p + rain_coef rain + fert_coef p_fert + temp_coef temp + u_s
/// with all six shifters i.i.d. N(0, 1). The demand price slope b_d is
/// DgpSpec::beta.
struct SimultaneityParams {
  double demand_intercept = 0.0;
  double income_coef = 1.0;
  double sub_coef = 0.5;
  double comp_coef = -0.5;
  double supply_intercept = 0.0;
  double supply_slope = 1.0;
  double rain_coef = 0.5;
  double fert_coef = -0.5;
  double temp_coef = 0.25;
  double sigma_supply = 0.5;
  /// SD of u_d in the homoscedastic cell.
  double sigma_demand = 0.5;
  /// In the heteroscedastic cell u_d,i ~ N(0, hetero_scale |income_i|).
  double hetero_scale = 0.5;
};

struct DgpSpec {
  DgpFamily family = DgpFamily::omitted;
  std::size_t n = 500;
  bool hetero = false;
  double lambda = 0.5;  // omitted: v = 0.5 N(0,2) + lambda x
  double delta = 1.0;   // omitted: coefficient of v
  bool me = false;      // measurement: add N(0,1) error to the observed x
  double alpha = 0.0;
  double beta = 1.0;
  SimultaneityParams sim;
};

/// Latent draws of the omitted-variable design, in generation order.
struct OmittedDraw {
  Vector x;
  Vector v;
  Vector u;
  Vector y;
};
OmittedDraw draw_omitted(const DgpSpec& spec, RngState& rng);

/// y = alpha + beta x + delta v + u, x ~ N(0,2), v = 0.5 N(0,2) + lambda x,
/// u ~ N(0,1) or N(0,|v_i|). Only x is returned as a regressor.
Dataset dgp_omitted(const DgpSpec& spec, RngState& rng);

/// y = alpha + beta x + u, x ~ N(0,2), u ~ N(0,1) or N(0,|x_i|); the observed
/// regressor is x + N(0,1) when spec.me.
Dataset dgp_measurement(const DgpSpec& spec, RngState& rng);

/// Equilibrium (ln p, ln q) of the market in SimultaneityParams. Regressors are
/// ln_p, income, p_sub, p_comp; response ln q.
Dataset dgp_simultaneity(const DgpSpec& spec, RngState& rng);

Dataset generate(const DgpSpec& spec, RngState& rng);

/// Seeds for one replication: data from stream `rep` of `cell_seed`, bootstrap
/// from mix_seed(~cell_seed, rep).
struct ReplicationSeeds {
  std::uint64_t data_seed;
  std::uint64_t data_stream;
  std::uint64_t bootstrap_seed;
};
ReplicationSeeds replication_seeds(std::uint64_t cell_seed, std::size_t rep) noexcept;

/// Seed of cell `cell` in a table run.
std::uint64_t cell_seed(std::uint64_t table_seed, std::size_t cell) noexcept;

struct ReplicationResult {
  double lad_b = 0.0;
  double ols_b = 0.0;
  double r = 0.0;
  double zstat_boot = 0.0;
  double zstat_normal = 0.0;
  bool bp_reject = false;
  std::size_t degenerate_resamples = 0;
};

/// One replication in isolation: generate, OLS, Breusch-Pagan (squares),
/// bootstrap bias test. Statistics refer to the first regressor.
ReplicationResult run_replication(const DgpSpec& spec, std::uint64_t cell_seed, std::size_t rep,
                                  std::size_t B);

struct CellSummary {
  DgpSpec spec;
  std::string row_level;  // e.g. "Yes" for the table's row factor
  std::string col_level;  // heteroscedasticity "Yes"/"No"
  std::size_t reps = 0;
  double mean_b = 0.0;
  double mean_r = 0.0;
  double mean_zstat = 0.0;
  double sd_zstat = 0.0;
  double mean_zstat_normal = 0.0;
  double mean_ols_b = 0.0;
  double bp_reject_rate = 0.0;
  std::size_t degenerate_resamples = 0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
};

inline constexpr double kBpAlpha = 0.05;

/// Runs `reps` replications of `spec` with `seed` as the cell seed. Results are
/// reduced in replication order, so any thread count gives identical output.
CellSummary replicate(const DgpSpec& spec, std::size_t reps, std::size_t B, std::uint64_t seed,
                      unsigned threads = 1);

enum class Table { table1, table2, table3, delta5 };

const char* to_string(Table t) noexcept;
/// Throws UsageError for names other than table1, table2, table3, delta5.
Table parse_table(const std::string& name);

struct TableLayout {
  std::string title;
  std::string row_factor;
  std::vector<CellSummary> cells;  // specs and labels filled, statistics empty
};

TableLayout table_layout(Table table);

/// All cells of `table`, cell i seeded with cell_seed(seed, i).
std::vector<CellSummary> run_table(Table table, std::size_t reps, std::size_t B, std::uint64_t seed,
                                   unsigned threads = 1);

}  // namespace hetbias
