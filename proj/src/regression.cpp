#include "hetbias/regression.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "hetbias/errors.hpp"

namespace hetbias {

namespace {

double total_sum_of_squares(const Vector& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum();
}

// R^2 of an intercept regression of `response` on `Z`; 0 when the response
// has no variation.
double auxiliary_r_squared(const Matrix& Z, const Vector& response) {
  const double tss = total_sum_of_squares(response);
  const double magnitude = response.squaredNorm();
  if (tss <= 1e-28 * magnitude || tss == 0.0) return 0.0;
  Matrix design(Z.rows(), Z.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(Z.cols()) = Z;
  const Vector coef = least_squares(design, response);
  const double ssr = (response - design * coef).squaredNorm();
  return std::clamp(1.0 - ssr / tss, 0.0, 1.0);
}

bool is_constant(const Eigen::Ref<const Vector>& v) { return v.maxCoeff() == v.minCoeff(); }

}  // namespace

Matrix Dataset::design() const {
  if (!intercept) return X;
  Matrix out(X.rows(), X.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(X.cols()) = X;
  return out;
}

std::vector<std::string> Dataset::column_names() const {
  std::vector<std::string> out;
  if (intercept) out.emplace_back("(intercept)");
  out.insert(out.end(), regressor_names.begin(), regressor_names.end());
  return out;
}

void Dataset::validate(Eigen::Index min_rows) const {
  if (X.rows() != y.size()) {
    throw ParameterError("dataset: X has " + std::to_string(X.rows()) + " rows, y has " +
                         std::to_string(y.size()));
  }
  if (static_cast<Eigen::Index>(regressor_names.size()) != X.cols()) {
    throw ParameterError("dataset: " + std::to_string(regressor_names.size()) +
                         " names for " + std::to_string(X.cols()) + " regressor columns");
  }
  if (num_columns() == 0) throw ParameterError("dataset: no regressors and no intercept");
  if (n() < min_rows) {
    throw ParameterError("dataset: need n >= " + std::to_string(min_rows) + ", got n=" +
                         std::to_string(n()) + ", k=" + std::to_string(num_columns()));
  }
  require_finite(X, "dataset regressors");
  require_finite(y, "dataset response");
  std::set<std::string> seen;
  for (const auto& name : regressor_names) {
    if (!seen.insert(name).second) throw ParameterError("dataset: duplicate regressor '" + name + "'");
  }
}

Dataset make_dataset(std::vector<std::string> names, Matrix X, Vector y, bool intercept) {
  Dataset d{std::move(names), std::move(X), std::move(y), intercept};
  d.validate();
  return d;
}

const char* to_string(BpVariant v) noexcept { return v == BpVariant::levels ? "levels" : "squares"; }

BpVariant parse_bp_variant(const std::string& s) {
  if (s == "levels") return BpVariant::levels;
  if (s == "squares") return BpVariant::squares;
  throw ParameterError("unknown Breusch-Pagan variant '" + s + "' (expected levels|squares)");
}

std::size_t default_lag(std::size_t n) {
  if (n < 1) throw ParameterError("default_lag: n must be >= 1");
  return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

Matrix hac_newey_west(const Matrix& X_aug, const Vector& residuals, std::size_t lag) {
  const Eigen::Index n = X_aug.rows();
  const Eigen::Index k = X_aug.cols();
  if (residuals.size() != n) throw ParameterError("hac_newey_west: residual length mismatch");
  if (lag >= static_cast<std::size_t>(n)) {
    throw ParameterError("hac_newey_west: lag " + std::to_string(lag) + " must be < n = " +
                         std::to_string(n));
  }
  const Matrix scores = residuals.asDiagonal() * X_aug;
  Matrix meat = scores.transpose() * scores;
  for (std::size_t l = 1; l <= lag; ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
    const Matrix gamma = scores.bottomRows(n - li).transpose() * scores.topRows(n - li);
    meat += w * (gamma + gamma.transpose());
  }

  Eigen::HouseholderQR<Matrix> qr(X_aug);
  const Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Matrix r_inv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
  const Matrix bread = r_inv * r_inv.transpose();
  Matrix cov = bread * meat * bread;
  return 0.5 * (cov + cov.transpose());
}

OlsFit ols_fit(const Dataset& data, std::optional<std::size_t> lag) {
  data.validate(data.num_columns() + 1);
  const Matrix Xa = data.design();
  OlsFit fit;
  try {
    fit.coefficients = least_squares(Xa, data.y);
  } catch (const SingularDesignError& e) {
    const auto names = data.column_names();
    std::string cols;
    for (auto c : e.columns()) cols += (cols.empty() ? "" : ", ") + names.at(c);
    throw SingularDesignError("singular design: " + cols +
                                  " collinear with the other regressors",
                              e.columns());
  }
  fit.fitted = Xa * fit.coefficients;
  fit.residuals = data.y - fit.fitted;
  const auto n = static_cast<std::size_t>(data.n());
  const auto k = static_cast<std::size_t>(Xa.cols());
  fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(n - k);
  const double tss = total_sum_of_squares(data.y);
  fit.r_squared = tss > 0.0 ? std::clamp(1.0 - fit.residuals.squaredNorm() / tss, 0.0, 1.0) : 0.0;
  fit.lag = lag.value_or(default_lag(n));
  fit.hac_cov = hac_newey_west(Xa, fit.residuals, fit.lag);
  fit.hac_se = fit.hac_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return fit;
}

double chi_square_sf(double x, std::size_t df) {
  if (df == 0) throw ParameterError("chi_square_sf: df must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

BpResult breusch_pagan(const Dataset& data, const OlsFit& fit, BpVariant variant) {
  if (fit.residuals.size() != data.n()) {
    throw ParameterError("breusch_pagan: fit does not belong to this dataset");
  }
  if (is_constant(data.y)) {
    throw ConstantResponseError("breusch_pagan: response is constant");
  }
  std::vector<Vector> columns;
  auto add_unique = [&](const Vector& c) {
    if (is_constant(c)) return;
    for (const auto& existing : columns) {
      if (existing == c) return;
    }
    columns.push_back(c);
  };
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) add_unique(data.X.col(j));
  if (variant == BpVariant::squares) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) add_unique(data.X.col(j).array().square().matrix());
  }
  if (columns.empty()) throw ParameterError("breusch_pagan: no non-constant auxiliary regressors");

  Matrix Z(data.n(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) Z.col(static_cast<Eigen::Index>(j)) = columns[j];

  const Vector e2 = fit.residuals.array().square().matrix();
  BpResult out;
  out.variant = variant;
  out.df = columns.size();
  out.lm_stat = static_cast<double>(data.n()) * auxiliary_r_squared(Z, e2);
  out.p_value = chi_square_sf(out.lm_stat, out.df);
  return out;
}

}  // namespace hetbias
