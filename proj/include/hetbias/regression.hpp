#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hetbias/numerics.hpp"

namespace hetbias {

/// Named regressors plus response. X excludes the intercept column; when
/// `intercept` is set every fit prepends a column of ones.
struct Dataset {
  std::vector<std::string> regressor_names;
  Matrix X;
  Vector y;
  bool intercept = true;

  Eigen::Index n() const noexcept { return y.size(); }
  Eigen::Index num_regressors() const noexcept { return X.cols(); }
  /// Columns of the augmented design, intercept included.
  Eigen::Index num_columns() const noexcept { return X.cols() + (intercept ? 1 : 0); }

  /// Intercept-augmented design matrix.
  Matrix design() const;

  /// Coefficient labels in fit order; "(intercept)" first when present.
  std::vector<std::string> column_names() const;

  /// Throws ParameterError when shape, finiteness, or name uniqueness fail.
  /// The default row floor is n >= k + 2; estimators that need fewer rows pass
  /// their own.
  void validate() const { validate(num_columns() + 2); }
  void validate(Eigen::Index min_rows) const;
};

Dataset make_dataset(std::vector<std::string> names, Matrix X, Vector y, bool intercept = true);

struct OlsFit {
  Vector coefficients;  // intercept first when present
  Vector residuals;
  Vector fitted;
  Matrix hac_cov;
  Vector hac_se;
  double sigma2 = 0.0;
  double r_squared = 0.0;
  std::size_t lag = 0;
};

enum class BpVariant { levels, squares };

const char* to_string(BpVariant v) noexcept;
/// Accepts "levels" or "squares".
BpVariant parse_bp_variant(const std::string& s);

struct BpResult {
  double lm_stat = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
  BpVariant variant = BpVariant::levels;
};

/// floor(4 (n/100)^(2/9)), the Newey-West plug-in bandwidth.
std::size_t default_lag(std::size_t n);

/// Newey-West sandwich (X'X)^-1 S (X'X)^-1 with Bartlett weights 1 - l/(lag+1).
Matrix hac_newey_west(const Matrix& X_aug, const Vector& residuals, std::size_t lag);

/// OLS with Newey-West standard errors. lag defaults to default_lag(n).
OlsFit ols_fit(const Dataset& data, std::optional<std::size_t> lag = std::nullopt);

/// Koenker's studentized Breusch-Pagan statistic n * R^2 from regressing the
/// squared OLS residuals on the auxiliary design. `squares` adds the squared
/// regressors, dropping columns that duplicate an existing one.
BpResult breusch_pagan(const Dataset& data, const OlsFit& fit, BpVariant variant);

/// Upper tail probability of a chi-square(df) variate.
double chi_square_sf(double x, std::size_t df);

}  // namespace hetbias
