#pragma once

#include <cstddef>

#include "hetbias/regression.hpp"

namespace hetbias {

struct LadFit {
  Vector coefficients;  // intercept first when present
  Vector residuals;
  double objective = 0.0;  // sum of absolute residuals
  std::size_t iterations = 0;
  bool converged = false;
};

struct LadOptions {
  double tol = 1e-8;
  std::size_t max_iter = 200;
  /// IRLS hands over to exact vertex descent once eps <= handoff * scale(y).
  double handoff = 1e-2;
  std::size_t max_pivots = 1000;
};

/// Median regression. Iteratively reweighted least squares on the smoothed
/// loss sum sqrt(e^2 + eps^2) runs from the OLS start, with eps starting at
/// 1e-2 * scale(y) and halving every iteration down to 1e-10 * scale(y). Once
/// eps reaches the hand-off level the k smallest residuals seed a vertex, and
/// simplex-style edge moves finish the fit; the vertex is accepted when the L1
/// dual multipliers certify it optimal. If that phase fails, IRLS continues and
/// converges once eps sits at its floor and the fitted values move by less than
/// tol * scale(y).
///
/// A non-converged fit is returned with converged = false, holding the iterate
/// with the smallest L1 objective seen. `iterations` counts IRLS steps plus
/// vertex pivots.
LadFit lad_fit(const Dataset& data, const LadOptions& options = {});

/// Exhaustive L1 minimizer for small problems: every k-point interpolating
/// coefficient vector is evaluated and the cheapest kept, ties going to the
/// lexicographically smallest coefficients. Requires k <= n <= 14 and k <= 3.
LadFit lad_fit_exact(const Dataset& data);

/// sum_i |y_i - X_aug,i . coefficients|
double objective_l1(const Vector& coefficients, const Dataset& data);

/// Robust magnitude of the response used to scale LAD tolerances: mean
/// absolute deviation about the mean, falling back to max|y|, then 1.
double response_scale(const Vector& y);

}  // namespace hetbias
