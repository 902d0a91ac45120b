#include "hetbias/simulate.hpp"

#include <cmath>
#include <string>

#include "hetbias/errors.hpp"
#include "hetbias/parallel.hpp"
#include "hetbias/regression.hpp"

namespace hetbias {

namespace {

void check_size(const DgpSpec& spec) {
  if (spec.n < 10) throw ParameterError("dgp: n must be >= 10, got " + std::to_string(spec.n));
}

Vector scaled_normals(RngState& rng, const Vector& sd) {
  Vector out = sample_normal(rng, 0.0, 1.0, static_cast<std::size_t>(sd.size()));
  return out.cwiseProduct(sd);
}

}  // namespace

const char* to_string(DgpFamily f) noexcept {
  switch (f) {
    case DgpFamily::omitted: return "omitted";
    case DgpFamily::measurement: return "measurement";
    case DgpFamily::simultaneity: return "simultaneity";
  }
  return "?";
}

OmittedDraw draw_omitted(const DgpSpec& spec, RngState& rng) {
  check_size(spec);
  const std::size_t n = spec.n;
  OmittedDraw d;
  d.x = sample_normal(rng, 0.0, 2.0, n);
  d.v = 0.5 * sample_normal(rng, 0.0, 2.0, n) + spec.lambda * d.x;
  d.u = spec.hetero ? scaled_normals(rng, d.v.cwiseAbs()) : sample_normal(rng, 0.0, 1.0, n);
  d.y = (spec.alpha + (spec.beta * d.x + spec.delta * d.v + d.u).array()).matrix();
  return d;
}

Dataset dgp_omitted(const DgpSpec& spec, RngState& rng) {
  OmittedDraw d = draw_omitted(spec, rng);
  return make_dataset({"x"}, Matrix(d.x), std::move(d.y));
}

Dataset dgp_measurement(const DgpSpec& spec, RngState& rng) {
  check_size(spec);
  const std::size_t n = spec.n;
  const Vector x = sample_normal(rng, 0.0, 2.0, n);
  const Vector u = spec.hetero ? scaled_normals(rng, x.cwiseAbs()) : sample_normal(rng, 0.0, 1.0, n);
  Vector y = (spec.alpha + (spec.beta * x + u).array()).matrix();
  Vector observed = spec.me ? Vector(x + sample_normal(rng, 0.0, 1.0, n)) : x;
  return make_dataset({"x"}, Matrix(observed), std::move(y));
}

Dataset dgp_simultaneity(const DgpSpec& spec, RngState& rng) {
  check_size(spec);
  const auto& p = spec.sim;
  // Equilibrium requires the supply slope to exceed the demand slope.
  const double denom = p.supply_slope - spec.beta;
  if (!(denom > 0.0)) {
    throw UnsolvableEquilibriumError("dgp_simultaneity: supply slope " + std::to_string(p.supply_slope) +
                                     " and demand slope " + std::to_string(spec.beta) +
                                     " admit no equilibrium");
  }
  const std::size_t n = spec.n;
  const Vector income = sample_normal(rng, 0.0, 1.0, n);
  const Vector p_sub = sample_normal(rng, 0.0, 1.0, n);
  const Vector p_comp = sample_normal(rng, 0.0, 1.0, n);
  const Vector rain = sample_normal(rng, 0.0, 1.0, n);
  const Vector p_fert = sample_normal(rng, 0.0, 1.0, n);
  const Vector temp = sample_normal(rng, 0.0, 1.0, n);
  const Vector u_d = spec.hetero ? scaled_normals(rng, p.hetero_scale * income.cwiseAbs())
                                 : sample_normal(rng, 0.0, p.sigma_demand, n);
  const Vector u_s = sample_normal(rng, 0.0, p.sigma_supply, n);

  const Vector demand_shift = p.income_coef * income + p.sub_coef * p_sub + p.comp_coef * p_comp;
  const Vector supply_shift = p.rain_coef * rain + p.fert_coef * p_fert + p.temp_coef * temp;
  const Vector ln_p =
      ((p.demand_intercept - p.supply_intercept) + (demand_shift - supply_shift + u_d - u_s).array())
          .matrix() /
      denom;
  Vector ln_q = (p.demand_intercept + (spec.beta * ln_p + demand_shift + u_d).array()).matrix();

  Matrix X(static_cast<Eigen::Index>(n), 4);
  X.col(0) = ln_p;
  X.col(1) = income;
  X.col(2) = p_sub;
  X.col(3) = p_comp;
  return make_dataset({"ln_p", "income", "p_sub", "p_comp"}, std::move(X), std::move(ln_q));
}

Dataset generate(const DgpSpec& spec, RngState& rng) {
  switch (spec.family) {
    case DgpFamily::omitted: return dgp_omitted(spec, rng);
    case DgpFamily::measurement: return dgp_measurement(spec, rng);
    case DgpFamily::simultaneity: return dgp_simultaneity(spec, rng);
  }
  throw ParameterError("generate: unknown DGP family");
}

ReplicationSeeds replication_seeds(std::uint64_t cell_seed, std::size_t rep) noexcept {
  return {cell_seed, static_cast<std::uint64_t>(rep), mix_seed(~cell_seed, rep)};
}

std::uint64_t cell_seed(std::uint64_t table_seed, std::size_t cell) noexcept {
  return mix_seed(table_seed, cell);
}

ReplicationResult run_replication(const DgpSpec& spec, std::uint64_t cell_seed, std::size_t rep,
                                  std::size_t B) {
  const auto seeds = replication_seeds(cell_seed, rep);
  RngState rng = rng_new(seeds.data_seed, seeds.data_stream);
  const Dataset data = generate(spec, rng);
  const OlsFit ols = ols_fit(data);
  const BpResult bp = breusch_pagan(data, ols, BpVariant::squares);
  const BiasTestReport report = bootstrap_bias_test(data, B, seeds.bootstrap_seed, 1.96, 1);

  const Eigen::Index focal = data.intercept ? 1 : 0;
  ReplicationResult out;
  out.lad_b = report.lad.coefficients(focal);
  out.ols_b = ols.coefficients(focal);
  out.r = report.stats.front().r;
  out.zstat_boot = report.stats.front().zstat_boot;
  out.zstat_normal = report.stats.front().zstat_normal;
  out.bp_reject = bp.p_value < kBpAlpha;
  out.degenerate_resamples = report.degenerate_resamples;
  return out;
}

CellSummary replicate(const DgpSpec& spec, std::size_t reps, std::size_t B, std::uint64_t seed,
                      unsigned threads) {
  if (reps < 1) throw ParameterError("replicate: reps must be >= 1");
  std::vector<ReplicationResult> results(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    try {
      results[r] = run_replication(spec, seed, r, B);
    } catch (const Error& e) {
      throw Error("replication " + std::to_string(r) + ": " + e.what());
    }
  });

  CellSummary cell;
  cell.spec = spec;
  cell.reps = reps;
  cell.B = B;
  cell.seed = seed;
  std::size_t rejections = 0;
  for (const auto& r : results) {
    cell.mean_b += r.lad_b;
    cell.mean_r += r.r;
    cell.mean_zstat += r.zstat_boot;
    cell.mean_zstat_normal += r.zstat_normal;
    cell.mean_ols_b += r.ols_b;
    rejections += r.bp_reject ? 1 : 0;
    cell.degenerate_resamples += r.degenerate_resamples;
  }
  const auto count = static_cast<double>(reps);
  cell.mean_b /= count;
  cell.mean_r /= count;
  cell.mean_zstat /= count;
  cell.mean_zstat_normal /= count;
  cell.mean_ols_b /= count;
  cell.bp_reject_rate = static_cast<double>(rejections) / count;
  if (reps > 1) {
    double ss = 0.0;
    for (const auto& r : results) ss += (r.zstat_boot - cell.mean_zstat) * (r.zstat_boot - cell.mean_zstat);
    cell.sd_zstat = std::sqrt(ss / (count - 1.0));
  }
  return cell;
}

const char* to_string(Table t) noexcept {
  switch (t) {
    case Table::table1: return "table1";
    case Table::table2: return "table2";
    case Table::table3: return "table3";
    case Table::delta5: return "delta5";
  }
  return "?";
}

Table parse_table(const std::string& name) {
  if (name == "table1") return Table::table1;
  if (name == "table2") return Table::table2;
  if (name == "table3") return Table::table3;
  if (name == "delta5") return Table::delta5;
  throw UsageError("unknown table '" + name + "' (expected table1, table2, table3, or delta5)");
}

TableLayout table_layout(Table table) {
  TableLayout layout;
  auto add = [&](DgpSpec spec, const char* row, const char* col) {
    CellSummary c;
    c.spec = spec;
    c.row_level = row;
    c.col_level = col;
    layout.cells.push_back(std::move(c));
  };
  switch (table) {
    case Table::table1: {
      layout.title = "Omitted variable simulation";
      layout.row_factor = "Are x and v correlated?";
      for (double lambda : {0.5, 0.0}) {
        for (bool hetero : {true, false}) {
          DgpSpec s;
          s.family = DgpFamily::omitted;
          s.lambda = lambda;
          s.hetero = hetero;
          add(s, lambda != 0.0 ? "Yes" : "No", hetero ? "Yes" : "No");
        }
      }
      break;
    }
    case Table::table2: {
      layout.title = "Measurement error simulation";
      layout.row_factor = "measurement error";
      for (bool me : {true, false}) {
        for (bool hetero : {true, false}) {
          DgpSpec s;
          s.family = DgpFamily::measurement;
          s.me = me;
          s.hetero = hetero;
          add(s, me ? "Yes" : "No", hetero ? "Yes" : "No");
        }
      }
      break;
    }
    case Table::table3: {
      layout.title = "Demand elasticity simulation";
      layout.row_factor = "simultaneity bias";
      for (bool hetero : {true, false}) {
        DgpSpec s;
        s.family = DgpFamily::simultaneity;
        s.beta = -1.0;
        s.hetero = hetero;
        add(s, "Yes", hetero ? "Yes" : "No");
      }
      break;
    }
    case Table::delta5: {
      layout.title = "Omitted variable with dominant omitted regressor (delta = 5)";
      layout.row_factor = "Are x and v correlated?";
      DgpSpec s;
      s.family = DgpFamily::omitted;
      s.lambda = 0.5;
      s.delta = 5.0;
      s.hetero = true;
      add(s, "Yes", "Yes");
      break;
    }
  }
  return layout;
}

std::vector<CellSummary> run_table(Table table, std::size_t reps, std::size_t B, std::uint64_t seed,
                                   unsigned threads) {
  TableLayout layout = table_layout(table);
  std::vector<CellSummary> out;
  out.reserve(layout.cells.size());
  for (std::size_t i = 0; i < layout.cells.size(); ++i) {
    const auto& proto = layout.cells[i];
    CellSummary cell = replicate(proto.spec, reps, B, cell_seed(seed, i), threads);
    cell.row_level = proto.row_level;
    cell.col_level = proto.col_level;
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace hetbias
