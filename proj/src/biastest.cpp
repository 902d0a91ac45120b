#include "hetbias/biastest.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "hetbias/errors.hpp"
#include "hetbias/parallel.hpp"

namespace hetbias {

namespace {

constexpr double kMaxAbsR = 1.0 - 1e-12;

// Relative variance floor below which an input is treated as constant.
bool numerically_constant(const Eigen::ArrayXd& centered, const Eigen::ArrayXd& raw) {
  const double spread = centered.abs().maxCoeff();
  const double magnitude = raw.abs().maxCoeff();
  return spread == 0.0 || spread <= 1e-13 * magnitude;
}

// Fisher z of every regressor against the residuals, or nullopt when any
// correlation is undefined or saturated.
std::optional<std::vector<double>> fisher_all(const Matrix& X, const Vector& resid) {
  std::vector<double> out(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double r;
    try {
      r = pearson_r(X.col(j), resid);
    } catch (const DegenerateCorrelationError&) {
      return std::nullopt;
    }
    if (std::fabs(r) > kMaxAbsR) return std::nullopt;
    out[static_cast<std::size_t>(j)] = fisher_z(r);
  }
  return out;
}

bool residuals_degenerate(const Vector& resid, const Vector& y) {
  return resid.cwiseAbs().maxCoeff() <= 1e-9 * response_scale(y);
}

}  // namespace

double pearson_r(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ParameterError("pearson_r: length mismatch");
  if (a.size() < 3) throw ParameterError("pearson_r: need at least 3 observations");
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  if (numerically_constant(da, a.array()) || numerically_constant(db, b.array())) {
    throw DegenerateCorrelationError("pearson_r: input has zero variance");
  }
  const double r = (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
  return std::clamp(r, -1.0, 1.0);
}

double fisher_z(double r) {
  if (!(std::fabs(r) <= kMaxAbsR)) {
    throw ParameterError("fisher_z: |r| must be <= 1 - 1e-12, got " + std::to_string(r));
  }
  return 0.5 * (std::log1p(r) - std::log1p(-r));
}

double zstat_normal(double r, std::size_t n) {
  if (n < 4) throw ParameterError("zstat_normal: n must be >= 4");
  return fisher_z(r) * std::sqrt(static_cast<double>(n - 3));
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ParameterError("sample_quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BiasTestReport bootstrap_bias_test(const Dataset& data, std::size_t B, std::uint64_t seed,
                                   double critical_value, unsigned threads) {
  if (B < kMinBootstrapResamples) {
    throw ParameterError("bootstrap_bias_test: B must be >= " +
                         std::to_string(kMinBootstrapResamples) + ", got " + std::to_string(B));
  }
  if (!(critical_value > 0.0)) throw ParameterError("bootstrap_bias_test: critical value must be > 0");
  data.validate();
  if (data.num_regressors() == 0) throw ParameterError("bootstrap_bias_test: no regressors to test");

  BiasTestReport report;
  report.n = static_cast<std::size_t>(data.n());
  report.B = B;
  report.seed = seed;
  report.critical_value = critical_value;
  report.lad = lad_fit(data);
  if (residuals_degenerate(report.lad.residuals, data.y)) {
    throw DegenerateCorrelationError(
        "LAD residuals are all zero (the response is an exact linear function of the "
        "regressors); the residual correlation is undefined");
  }

  const auto k = static_cast<std::size_t>(data.num_regressors());
  report.stats.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    auto& s = report.stats[j];
    s.name = data.regressor_names[j];
    try {
      s.r = pearson_r(data.X.col(static_cast<Eigen::Index>(j)), report.lad.residuals);
    } catch (const DegenerateCorrelationError&) {
      throw DegenerateCorrelationError("regressor '" + s.name +
                                       "' is constant; its residual correlation is undefined");
    }
    s.z = fisher_z(s.r);
    s.sigma_z_normal = 1.0 / std::sqrt(static_cast<double>(report.n - 3));
    s.zstat_normal = zstat_normal(s.r, report.n);
  }

  // Attempt a draws rows with RNG stream a. Attempts run in batches sized to
  // the outstanding need and are accepted in attempt order.
  const std::size_t budget = 10 * B;
  const auto n = data.n();
  std::vector<std::vector<double>> accepted;
  accepted.reserve(B);
  std::size_t attempts = 0;
  while (accepted.size() < B) {
    const std::size_t need = B - accepted.size();
    if (attempts + need > budget) {
      throw BootstrapDegeneracyError(
          "bootstrap: " + std::to_string(attempts - accepted.size()) +
          " degenerate resamples exhausted the budget of " + std::to_string(budget) +
          " attempts for B=" + std::to_string(B));
    }
    std::vector<std::optional<std::vector<double>>> batch(need);
    parallel_for(need, threads, [&](std::size_t i) {
      RngState rng = rng_new(seed, attempts + i);
      Dataset sample;
      sample.regressor_names = data.regressor_names;
      sample.intercept = data.intercept;
      sample.X.resize(n, data.X.cols());
      sample.y.resize(n);
      for (Eigen::Index row = 0; row < n; ++row) {
        const auto src = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        sample.X.row(row) = data.X.row(src);
        sample.y(row) = data.y(src);
      }
      for (Eigen::Index j = 0; j < sample.X.cols(); ++j) {
        if (sample.X.col(j).maxCoeff() == sample.X.col(j).minCoeff()) return;
      }
      LadFit fit;
      try {
        fit = lad_fit(sample);
      } catch (const SingularDesignError&) {
        return;
      }
      if (!fit.converged || residuals_degenerate(fit.residuals, sample.y)) return;
      batch[i] = fisher_all(sample.X, fit.residuals);
    });
    attempts += need;
    for (auto& item : batch) {
      if (item) accepted.push_back(std::move(*item));
    }
  }
  report.degenerate_resamples = attempts - B;

  std::vector<double> draws(B);
  for (std::size_t j = 0; j < k; ++j) {
    auto& s = report.stats[j];
    double mean = 0.0;
    for (std::size_t b = 0; b < B; ++b) mean += accepted[b][j];
    mean /= static_cast<double>(B);
    double ss = 0.0;
    for (std::size_t b = 0; b < B; ++b) ss += (accepted[b][j] - mean) * (accepted[b][j] - mean);
    s.sigma_z_boot = std::sqrt(ss / static_cast<double>(B - 1));
    if (!(s.sigma_z_boot > 0.0)) {
      throw BootstrapDegeneracyError("bootstrap: Fisher z of '" + s.name +
                                     "' did not vary across resamples");
    }
    s.zstat_boot = s.z / s.sigma_z_boot;
    std::size_t inside = 0;
    for (std::size_t b = 0; b < B; ++b) {
      draws[b] = accepted[b][j] / s.sigma_z_boot;
      if (std::fabs(draws[b]) < critical_value) ++inside;
    }
    s.ci_lower = sample_quantile(draws, 0.025);
    s.ci_upper = sample_quantile(draws, 0.975);
    s.insignificant_fraction = static_cast<double>(inside) / static_cast<double>(B);
    s.biased_decision = std::fabs(s.zstat_boot) > critical_value;
  }
  return report;
}

}  // namespace hetbias
