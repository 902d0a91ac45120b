#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hetbias/lad.hpp"

namespace hetbias {

/// Test statistics for one non-intercept regressor.
struct RegressorBiasStat {
  std::string name;
  double r = 0.0;  // correlation of the regressor with the LAD residuals
  double z = 0.0;  // Fisher transform of r
  double sigma_z_normal = 0.0;
  double sigma_z_boot = 0.0;
  double zstat_normal = 0.0;
  double zstat_boot = 0.0;
  double ci_lower = 0.0;  // 2.5% percentile of the bootstrap zstats
  double ci_upper = 0.0;  // 97.5% percentile
  double insignificant_fraction = 0.0;
  bool biased_decision = false;
};

struct BiasTestReport {
  std::vector<RegressorBiasStat> stats;
  std::size_t n = 0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  double critical_value = 1.96;
  LadFit lad;
  std::size_t degenerate_resamples = 0;
};

inline constexpr std::size_t kMinBootstrapResamples = 50;

/// Product-moment correlation. Throws DegenerateCorrelationError when either
/// input has (numerically) zero variance.
double pearson_r(const Vector& a, const Vector& b);

/// 0.5 (ln(1+r) - ln(1-r)); requires |r| <= 1 - 1e-12.
double fisher_z(double r);

/// fisher_z(r) * sqrt(n - 3); requires n >= 4.
double zstat_normal(double r, std::size_t n);

/// Full LAD fit, per-regressor correlations with the LAD residuals, and a pairs
/// bootstrap of the Fisher z. Resample b uses RNG stream b of `seed`; resamples
/// with a constant regressor, a degenerate residual vector, or a non-converged
/// LAD fit are redrawn (budget 10 B attempts) and counted. The report does not
/// depend on `threads`.
BiasTestReport bootstrap_bias_test(const Dataset& data, std::size_t B, std::uint64_t seed,
                                   double critical_value = 1.96, unsigned threads = 1);

/// Linear-interpolation (type 7) quantile of an unsorted sample.
double sample_quantile(std::vector<double> values, double p);

}  // namespace hetbias
