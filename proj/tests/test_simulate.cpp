#include <doctest.h>

#include <cmath>

#include "hetbias/errors.hpp"
#include "hetbias/regression.hpp"
#include "hetbias/simulate.hpp"

using namespace hetbias;

namespace {

DgpSpec omitted(double lambda, bool hetero) {
  DgpSpec s;
  s.family = DgpFamily::omitted;
  s.lambda = lambda;
  s.hetero = hetero;
  return s;
}

DgpSpec measurement(bool me, bool hetero) {
  DgpSpec s;
  s.family = DgpFamily::measurement;
  s.me = me;
  s.hetero = hetero;
  return s;
}

double corr(const Vector& a, const Vector& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

double slope(const Vector& x, const Vector& y) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  return (dx * (y.array() - y.mean())).sum() / dx.square().sum();
}

template <typename Fit>
double mean_over(const DgpSpec& spec, std::uint64_t seed, std::size_t reps, Fit fit) {
  double sum = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    auto g = rng_new(seed, r);
    sum += fit(generate(spec, g));
  }
  return sum / static_cast<double>(reps);
}

double ols_slope(const Dataset& d) { return ols_fit(d).coefficients(1); }
double lad_slope(const Dataset& d) { return lad_fit(d).coefficients(1); }

}  // namespace

TEST_CASE("dgp_omitted: correlated design biases OLS to 1.5") {
  CHECK(std::fabs(mean_over(omitted(0.5, false), 1, 500, ols_slope) - 1.5) < 0.02);
}

TEST_CASE("dgp_omitted: lambda = 0 leaves x and v uncorrelated") {
  auto g = rng_new(2, 0);
  const OmittedDraw d = draw_omitted(omitted(0.0, false), g);
  CHECK(std::fabs(corr(d.x, d.v)) < 0.1);
}

TEST_CASE("dgp_omitted: heteroscedastic |u| grows with |v|") {
  auto g = rng_new(3, 0);
  const OmittedDraw d = draw_omitted(omitted(0.5, true), g);
  CHECK(slope(d.v.cwiseAbs(), d.u.cwiseAbs()) > 0.0);
}

TEST_CASE("dgp_omitted: analytic moments over 1e5 draws") {
  for (double lambda : {0.0, 0.5}) {
    DgpSpec spec = omitted(lambda, false);
    spec.n = 100000;
    auto g = rng_new(4, 0);
    const OmittedDraw d = draw_omitted(spec, g);
    CHECK(std::fabs(slope(d.x, d.v) - lambda) < 0.02);
    CHECK(std::fabs(slope(d.x, d.y) - 1.0 - spec.delta * lambda) < 0.03);
  }
}

TEST_CASE("dgp_measurement: attenuation and unbiased cells") {
  CHECK(std::fabs(mean_over(measurement(true, false), 5, 500, ols_slope) - 0.8) < 0.03);
  CHECK(std::fabs(mean_over(measurement(false, false), 6, 500, lad_slope) - 1.0) < 0.02);
  CHECK(std::fabs(mean_over(measurement(true, true), 7, 500, lad_slope) - 0.665) < 0.05);
}

TEST_CASE("dgp_measurement: pooled attenuation factor over 1e5 draws") {
  DgpSpec spec = measurement(true, false);
  spec.n = 100000;
  auto g = rng_new(8, 0);
  const Dataset d = dgp_measurement(spec, g);
  CHECK(std::fabs(slope(d.X.col(0), d.y) - 0.8) < 0.02);
}

TEST_CASE("dgp_simultaneity: layout and equilibrium checks") {
  DgpSpec spec;
  spec.family = DgpFamily::simultaneity;
  spec.beta = -1.0;
  auto g = rng_new(9, 0);
  const Dataset d = dgp_simultaneity(spec, g);
  CHECK(d.regressor_names == std::vector<std::string>{"ln_p", "income", "p_sub", "p_comp"});
  CHECK(d.n() == 500);

  spec.sim.supply_slope = -1.0;
  CHECK_THROWS_AS(dgp_simultaneity(spec, g), UnsolvableEquilibriumError);
}

TEST_CASE("dgp_simultaneity: OLS price coefficient biased toward zero") {
  DgpSpec spec;
  spec.family = DgpFamily::simultaneity;
  spec.beta = -1.0;
  const double b = mean_over(spec, 10, 200, ols_slope);
  CHECK(b > -1.0);
  CHECK(b < 0.0);
}

TEST_CASE("dgp: n below 10 rejected") {
  DgpSpec spec = omitted(0.5, true);
  spec.n = 9;
  auto g = rng_new(1, 0);
  CHECK_THROWS_AS(dgp_omitted(spec, g), ParameterError);
}

TEST_CASE("parse_table") {
  CHECK(parse_table("table1") == Table::table1);
  CHECK(parse_table("delta5") == Table::delta5);
  CHECK_THROWS_AS(parse_table("table9"), UsageError);
}

TEST_CASE("table layouts have 4, 4, 2, 1 cells") {
  CHECK(table_layout(Table::table1).cells.size() == 4);
  CHECK(table_layout(Table::table2).cells.size() == 4);
  CHECK(table_layout(Table::table3).cells.size() == 2);
  CHECK(table_layout(Table::delta5).cells.size() == 1);
}

TEST_CASE("run_table: reps = 1 smoke run for every table") {
  for (Table t : {Table::table1, Table::table2, Table::table3, Table::delta5}) {
    const auto cells = run_table(t, 1, 50, 7);
    CHECK(cells.size() == table_layout(t).cells.size());
    for (const auto& c : cells) {
      CHECK(c.reps == 1);
      CHECK(std::isfinite(c.mean_zstat));
    }
  }
}

TEST_CASE("run_table: deterministic, and independent of thread count") {
  const auto a = run_table(Table::table2, 6, 50, 11, 1);
  const auto b = run_table(Table::table2, 6, 50, 11, 1);
  const auto c = run_table(Table::table2, 6, 50, 11, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean_b == b[i].mean_b);
    CHECK(a[i].mean_zstat == b[i].mean_zstat);
    CHECK(a[i].mean_b == c[i].mean_b);
    CHECK(a[i].mean_zstat == c[i].mean_zstat);
    CHECK(a[i].sd_zstat == c[i].sd_zstat);
    CHECK(a[i].bp_reject_rate == c[i].bp_reject_rate);
  }
}

TEST_CASE("a single replication can be re-run in isolation") {
  const DgpSpec spec = omitted(0.5, true);
  const std::uint64_t seed = cell_seed(3, 0);
  const CellSummary cell = replicate(spec, 3, 50, seed);
  double sum = 0.0;
  for (std::size_t r = 0; r < 3; ++r) sum += run_replication(spec, seed, r, 50).zstat_boot;
  CHECK(sum / 3.0 == doctest::Approx(cell.mean_zstat).epsilon(1e-15));
}
