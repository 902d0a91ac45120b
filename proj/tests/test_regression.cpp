#include <doctest.h>

#include <cmath>
#include <limits>

#include "hetbias/errors.hpp"
#include "hetbias/regression.hpp"
#include "hetbias/simulate.hpp"
#include "oracles.hpp"

using namespace hetbias;

namespace {

Dataset line_data() {
  Matrix X(3, 1);
  X << 0, 1, 2;
  Vector y(3);
  y << 1, 3, 5;
  Dataset d{{"x"}, X, y, true};
  return d;
}

Dataset random_dataset(RngState& g, Eigen::Index n, int k) {
  Matrix X(n, k);
  for (int j = 0; j < k; ++j) X.col(j) = sample_normal(g, 1.0, 1.0 + j, static_cast<std::size_t>(n));
  Vector y = sample_normal(g, 0.0, 1.0, static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) y(i) *= 1.0 + std::fabs(X(i, 0));
  y += X.rowwise().sum();
  std::vector<std::string> names;
  for (int j = 0; j < k; ++j) names.push_back("x" + std::to_string(j));
  return make_dataset(names, X, y);
}

DgpSpec table1_spec(double lambda, bool hetero) {
  DgpSpec s;
  s.family = DgpFamily::omitted;
  s.lambda = lambda;
  s.hetero = hetero;
  return s;
}

}  // namespace

TEST_CASE("Dataset validation") {
  Matrix X = Matrix::Ones(5, 2);
  X.col(1) << 1, 2, 3, 4, 5;
  Vector y = Vector::LinSpaced(5, 0, 1);
  CHECK_NOTHROW(make_dataset({"a", "b"}, X, y));
  CHECK_THROWS_AS(make_dataset({"a", "a"}, X, y), ParameterError);
  CHECK_THROWS_AS(make_dataset({"a"}, X, y), ParameterError);
  CHECK_THROWS_AS(make_dataset({"a", "b"}, X.topRows(4), y.head(4)), ParameterError);  // n < k + 2
  Vector bad = y;
  bad(2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(make_dataset({"a", "b"}, X, bad), ParameterError);
}

TEST_CASE("default_lag") {
  CHECK(default_lag(100) == 4);
  CHECK(default_lag(500) == 5);
  CHECK(default_lag(1) == 1);
  CHECK_THROWS_AS(default_lag(0), ParameterError);
}

TEST_CASE("ols_fit: perfect line") {
  const Dataset d = line_data();
  const OlsFit fit = ols_fit(d);
  CHECK(fit.coefficients(0) == doctest::Approx(1.0));
  CHECK(fit.coefficients(1) == doctest::Approx(2.0));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK((fit.fitted + fit.residuals - d.y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ols_fit: regressor collinear with the intercept is a singular design") {
  auto g = rng_new(3, 0);
  Matrix X(20, 2);
  X.col(0) = sample_normal(g, 0.0, 1.0, 20);
  X.col(1) = X.col(0).array() + 1.0;
  const Vector y = sample_normal(g, 0.0, 1.0, 20);
  try {
    ols_fit(make_dataset({"x", "x_shifted"}, X, y));
    FAIL("expected SingularDesignError");
  } catch (const SingularDesignError& e) {
    CHECK(std::string(e.what()).find("collinear") != std::string::npos);
  }
}

TEST_CASE("ols_fit: one Table 1 no-hetero uncorrelated draw recovers the slope") {
  auto g = rng_new(20250801, 0);
  const Dataset d = dgp_omitted(table1_spec(0.0, false), g);
  const OlsFit fit = ols_fit(d);
  CHECK(std::fabs(fit.coefficients(1) - 1.0) < 0.15);
  CHECK(fit.lag == 5);
}

TEST_CASE("ols_fit: orthogonality and scale equivariance") {
  auto g = rng_new(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = random_dataset(g, 40 + trial, 1 + trial % 3);
    const OlsFit fit = ols_fit(d);
    const Matrix Xa = d.design();
    const double bound = 1e-8 * static_cast<double>(d.n()) * Xa.cwiseAbs().maxCoeff() * d.y.cwiseAbs().maxCoeff();
    CHECK((Xa.transpose() * fit.residuals).cwiseAbs().maxCoeff() <= bound);

    const BpResult bp = breusch_pagan(d, fit, BpVariant::levels);
    for (double c : {0.001, 1000.0}) {
      Dataset scaled = d;
      scaled.y *= c;
      const OlsFit f2 = ols_fit(scaled);
      CHECK((f2.coefficients - c * fit.coefficients).cwiseAbs().maxCoeff() <= 1e-9 * c * fit.coefficients.cwiseAbs().maxCoeff());
      CHECK((f2.hac_se - c * fit.hac_se).cwiseAbs().maxCoeff() <= 1e-9 * c * fit.hac_se.maxCoeff());
      CHECK(f2.r_squared == doctest::Approx(fit.r_squared).epsilon(1e-10));
      const BpResult bp2 = breusch_pagan(scaled, f2, BpVariant::levels);
      CHECK(bp2.lm_stat == doctest::Approx(bp.lm_stat).epsilon(1e-8));
      CHECK(bp2.p_value == doctest::Approx(bp.p_value).epsilon(1e-8));
    }
  }
}

TEST_CASE("hac_newey_west: zero residuals give a zero matrix") {
  const Dataset d = line_data();
  const Matrix cov = hac_newey_west(d.design(), Vector::Zero(3), 1);
  CHECK(cov.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hac_newey_west: lag 0 equals the White estimator") {
  auto g = rng_new(10, 0);
  for (int fixture = 0; fixture < 10; ++fixture) {
    const Dataset d = random_dataset(g, 10, 2);
    const Matrix Xa = d.design();
    const Vector e = sample_normal(g, 0.0, 1.0, 10);
    const Matrix hac = hac_newey_west(Xa, e, 0);
    const Matrix white = oracle::white_estimator(Xa, e);
    CHECK((hac - white).cwiseAbs().maxCoeff() <= 1e-10 * white.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("hac_newey_west: symmetric positive semidefinite") {
  auto g = rng_new(12, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = random_dataset(g, 60, 3);
    const OlsFit fit = ols_fit(d, static_cast<std::size_t>(trial));
    CHECK((fit.hac_cov - fit.hac_cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(fit.hac_cov);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * fit.hac_cov.trace());
  }
}

TEST_CASE("hac_newey_west: lag must be below n") {
  const Dataset d = line_data();
  CHECK_THROWS_AS(hac_newey_west(d.design(), Vector::Ones(3), 3), ParameterError);
}

TEST_CASE("hac_newey_west: close to classical SEs under homoscedasticity") {
  auto g = rng_new(2000, 0);
  Matrix X(2000, 1);
  X.col(0) = sample_normal(g, 0.0, 2.0, 2000);
  const Vector y = (X.col(0) + sample_normal(g, 0.0, 1.0, 2000)).eval();
  const Dataset d = make_dataset({"x"}, X, y);
  const OlsFit fit = ols_fit(d);
  const Matrix Xa = d.design();
  const Matrix classical = fit.sigma2 * (Xa.transpose() * Xa).inverse();
  for (int j = 0; j < 2; ++j) {
    const double ratio = fit.hac_se(j) / std::sqrt(classical(j, j));
    CHECK(ratio > 0.85);
    CHECK(ratio < 1.15);
  }
}

TEST_CASE("chi_square_sf reference values") {
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(chi_square_sf(5.991464547107979, 2) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(chi_square_sf(0.0, 3) == 1.0);
}

TEST_CASE("breusch_pagan: constant |residual| gives LM 0 and p 1") {
  Matrix X(6, 1);
  X << 1, 2, 3, 4, 5, 6;
  Vector y(6);
  y << 2, 1, 4, 3, 6, 5;
  const Dataset d = make_dataset({"x"}, X, y);
  OlsFit fit = ols_fit(d);
  fit.residuals << 0.5, -0.5, 0.5, -0.5, 0.5, -0.5;
  for (auto variant : {BpVariant::levels, BpVariant::squares}) {
    const BpResult bp = breusch_pagan(d, fit, variant);
    CHECK(bp.lm_stat == 0.0);
    CHECK(bp.p_value == 1.0);
  }
}

TEST_CASE("breusch_pagan: constant response refused") {
  Matrix X(6, 1);
  X << 1, 2, 3, 4, 5, 6;
  const Dataset d = make_dataset({"x"}, X, Vector::Constant(6, 2.0));
  const OlsFit fit = ols_fit(d);
  CHECK(fit.r_squared == 0.0);
  CHECK_THROWS_AS(breusch_pagan(d, fit, BpVariant::levels), ConstantResponseError);
}

TEST_CASE("breusch_pagan: squares variant drops duplicated columns") {
  auto g = rng_new(4, 0);
  Matrix X(30, 2);
  X.col(0) = sample_normal(g, 0.0, 1.0, 30);
  for (int i = 0; i < 30; ++i) X(i, 1) = i % 2;  // dummy: its square duplicates it
  const Vector y = sample_normal(g, 0.0, 1.0, 30);
  const Dataset d = make_dataset({"x", "dummy"}, X, y);
  const BpResult bp = breusch_pagan(d, ols_fit(d), BpVariant::squares);
  CHECK(bp.df == 3);
}

TEST_CASE("breusch_pagan: power and size on the Table 1 designs (500 replications)") {
  auto rejection_rate = [](const DgpSpec& spec, std::uint64_t seed) {
    int rejections = 0;
    for (std::size_t r = 0; r < 500; ++r) {
      auto g = rng_new(seed, r);
      const Dataset d = dgp_omitted(spec, g);
      rejections += breusch_pagan(d, ols_fit(d), BpVariant::squares).p_value < 0.05;
    }
    return rejections / 500.0;
  };
  const double power = rejection_rate(table1_spec(0.5, true), 101);
  const double size = rejection_rate(table1_spec(0.0, false), 102);
  MESSAGE("BP power " << power << ", size " << size);
  CHECK(power >= 0.8);
  CHECK(size >= 0.02);
  CHECK(size <= 0.09);
}
