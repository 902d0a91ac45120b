#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hetbias/biastest.hpp"
#include "hetbias/cli.hpp"
#include "hetbias/errors.hpp"
#include "hetbias/lad.hpp"
#include "hetbias/regression.hpp"
#include "hetbias/simulate.hpp"
#include "hetbias/version.hpp"

namespace py = pybind11;
using namespace hetbias;

namespace {

Dataset to_dataset(const Matrix& X, const Vector& y, std::optional<std::vector<std::string>> names,
                   bool intercept) {
  std::vector<std::string> cols;
  if (names) {
    cols = *names;
  } else {
    for (Eigen::Index j = 0; j < X.cols(); ++j) cols.push_back("x" + std::to_string(j + 1));
  }
  return make_dataset(std::move(cols), X, y, intercept);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heteroscedasticity-based OLS bias test";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "HetbiasError", PyExc_ValueError);

  py::class_<LadFit>(m, "LadFit")
      .def_readonly("coefficients", &LadFit::coefficients)
      .def_readonly("residuals", &LadFit::residuals)
      .def_readonly("objective", &LadFit::objective)
      .def_readonly("iterations", &LadFit::iterations)
      .def_readonly("converged", &LadFit::converged);

  py::class_<OlsFit>(m, "OlsFit")
      .def_readonly("coefficients", &OlsFit::coefficients)
      .def_readonly("residuals", &OlsFit::residuals)
      .def_readonly("fitted", &OlsFit::fitted)
      .def_readonly("hac_cov", &OlsFit::hac_cov)
      .def_readonly("hac_se", &OlsFit::hac_se)
      .def_readonly("sigma2", &OlsFit::sigma2)
      .def_readonly("r_squared", &OlsFit::r_squared)
      .def_readonly("lag", &OlsFit::lag);

  py::class_<BpResult>(m, "BpResult")
      .def_readonly("lm_stat", &BpResult::lm_stat)
      .def_readonly("df", &BpResult::df)
      .def_readonly("p_value", &BpResult::p_value)
      .def_property_readonly("variant", [](const BpResult& r) { return std::string(to_string(r.variant)); });

  py::class_<RegressorBiasStat>(m, "RegressorBiasStat")
      .def_readonly("name", &RegressorBiasStat::name)
      .def_readonly("r", &RegressorBiasStat::r)
      .def_readonly("z", &RegressorBiasStat::z)
      .def_readonly("sigma_z_normal", &RegressorBiasStat::sigma_z_normal)
      .def_readonly("sigma_z_boot", &RegressorBiasStat::sigma_z_boot)
      .def_readonly("zstat_normal", &RegressorBiasStat::zstat_normal)
      .def_readonly("zstat_boot", &RegressorBiasStat::zstat_boot)
      .def_readonly("ci_lower", &RegressorBiasStat::ci_lower)
      .def_readonly("ci_upper", &RegressorBiasStat::ci_upper)
      .def_readonly("insignificant_fraction", &RegressorBiasStat::insignificant_fraction)
      .def_readonly("biased", &RegressorBiasStat::biased_decision);

  py::class_<BiasTestReport>(m, "BiasTestReport")
      .def_readonly("stats", &BiasTestReport::stats)
      .def_readonly("n", &BiasTestReport::n)
      .def_readonly("B", &BiasTestReport::B)
      .def_readonly("seed", &BiasTestReport::seed)
      .def_readonly("critical_value", &BiasTestReport::critical_value)
      .def_readonly("lad", &BiasTestReport::lad)
      .def_readonly("degenerate_resamples", &BiasTestReport::degenerate_resamples);

  py::class_<CellSummary>(m, "CellSummary")
      .def_readonly("row_level", &CellSummary::row_level)
      .def_readonly("col_level", &CellSummary::col_level)
      .def_readonly("reps", &CellSummary::reps)
      .def_readonly("mean_b", &CellSummary::mean_b)
      .def_readonly("mean_r", &CellSummary::mean_r)
      .def_readonly("mean_zstat", &CellSummary::mean_zstat)
      .def_readonly("sd_zstat", &CellSummary::sd_zstat)
      .def_readonly("mean_zstat_normal", &CellSummary::mean_zstat_normal)
      .def_readonly("mean_ols_b", &CellSummary::mean_ols_b)
      .def_readonly("bp_reject_rate", &CellSummary::bp_reject_rate)
      .def_readonly("degenerate_resamples", &CellSummary::degenerate_resamples);

  m.def("fisher_z", &fisher_z, py::arg("r"));
  m.def("zstat_normal", &zstat_normal, py::arg("r"), py::arg("n"));
  m.def("pearson_r", &pearson_r, py::arg("a"), py::arg("b"));
  m.def("default_lag", &default_lag, py::arg("n"));
  m.def("least_squares", &least_squares, py::arg("X"), py::arg("y"));

  m.def(
      "ols_fit",
      [](const Matrix& X, const Vector& y, std::optional<std::vector<std::string>> names, bool intercept,
         std::optional<std::size_t> lag) { return ols_fit(to_dataset(X, y, names, intercept), lag); },
      py::arg("X"), py::arg("y"), py::arg("names") = py::none(), py::arg("intercept") = true,
      py::arg("lag") = py::none());

  m.def(
      "breusch_pagan",
      [](const Matrix& X, const Vector& y, const std::string& variant, bool intercept) {
        const Dataset d = to_dataset(X, y, std::nullopt, intercept);
        return breusch_pagan(d, ols_fit(d), parse_bp_variant(variant));
      },
      py::arg("X"), py::arg("y"), py::arg("variant") = "levels", py::arg("intercept") = true);

  m.def(
      "lad_fit",
      [](const Matrix& X, const Vector& y, bool intercept, double tol, std::size_t max_iter) {
        LadOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        return lad_fit(to_dataset(X, y, std::nullopt, intercept), opts);
      },
      py::arg("X"), py::arg("y"), py::arg("intercept") = true, py::arg("tol") = 1e-8, py::arg("max_iter") = 200);

  m.def(
      "bias_test",
      [](const Matrix& X, const Vector& y, std::size_t B, std::uint64_t seed,
         std::optional<std::vector<std::string>> names, double critical_value, unsigned threads) {
        const Dataset d = to_dataset(X, y, names, true);
        py::gil_scoped_release release;
        return bootstrap_bias_test(d, B, seed, critical_value, threads);
      },
      py::arg("X"), py::arg("y"), py::arg("B") = 1000, py::arg("seed") = cli::kDefaultSeed,
      py::arg("names") = py::none(), py::arg("critical_value") = 1.96, py::arg("threads") = 1);

  m.def(
      "generate",
      [](const std::string& family, std::size_t n, bool hetero, double lambda, double delta, bool me,
         double beta, std::uint64_t seed, std::uint64_t stream) {
        DgpSpec spec;
        if (family == "omitted") {
          spec.family = DgpFamily::omitted;
        } else if (family == "measurement") {
          spec.family = DgpFamily::measurement;
        } else if (family == "simultaneity") {
          spec.family = DgpFamily::simultaneity;
        } else {
          throw ParameterError("unknown DGP family '" + family + "'");
        }
        spec.n = n;
        spec.hetero = hetero;
        spec.lambda = lambda;
        spec.delta = delta;
        spec.me = me;
        spec.beta = beta;
        auto rng = rng_new(seed, stream);
        const Dataset d = generate(spec, rng);
        return py::make_tuple(d.X, d.y, d.regressor_names);
      },
      py::arg("family"), py::arg("n") = 500, py::arg("hetero") = true, py::arg("lam") = 0.5,
      py::arg("delta") = 1.0, py::arg("me") = true, py::arg("beta") = 1.0, py::arg("seed") = 0,
      py::arg("stream") = 0,
      "Draws one dataset; returns (X, y, regressor names).");

  m.def(
      "run_table",
      [](const std::string& table, std::size_t reps, std::size_t B, std::uint64_t seed, unsigned threads) {
        const Table t = parse_table(table);
        py::gil_scoped_release release;
        return run_table(t, reps, B, seed, threads);
      },
      py::arg("table"), py::arg("reps") = 500, py::arg("B") = 200, py::arg("seed") = cli::kDefaultSeed,
      py::arg("threads") = 0);
}
