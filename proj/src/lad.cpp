#include "hetbias/lad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hetbias/errors.hpp"

namespace hetbias {

namespace {

// Exact finishing phase for the L1 fit. A vertex is a coefficient vector that
// interpolates k observations (the basis). At a vertex the multipliers
// h = X_B^-T sum_{i not in B} sign(e_i) x_i certify optimality when |h| <= 1;
// otherwise basis point j with |h_j| > 1 leaves along the edge that releases
// it, and a weighted-median line search picks the entering observation.
class VertexDescent {
 public:
  VertexDescent(Eigen::Index n, Eigen::Index k)
      : basis_(static_cast<std::size_t>(k)), in_basis_(static_cast<std::size_t>(n), 0),
        xb_(k, k), yb_(k), grad_(k), mult_(k), bound_(k), dir_(k), slope_(n), beta_(k), resid_(n) {}

  // Seeds the basis greedily with the smallest |residual| observations,
  // skipping rows linearly dependent on those already chosen (bootstrap
  // resamples repeat rows).
  bool seed(const Matrix& Xa, const Vector& y, const Vector& resid) {
    const Eigen::Index n = Xa.rows();
    const auto k = static_cast<Eigen::Index>(basis_.size());
    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    std::sort(order_.begin(), order_.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double ra = std::fabs(resid(a));
      const double rb = std::fabs(resid(b));
      return ra < rb || (ra == rb && a < b);
    });
    Matrix q(k, k);
    Eigen::Index chosen = 0;
    for (const Eigen::Index i : order_) {
      Vector v = Xa.row(i).transpose();
      const double norm = v.norm();
      if (norm == 0.0) continue;
      for (Eigen::Index c = 0; c < chosen; ++c) v -= q.col(c).dot(v) * q.col(c);
      if (v.norm() <= 1e-8 * norm) continue;
      q.col(chosen) = v / v.norm();
      basis_[static_cast<std::size_t>(chosen)] = i;
      if (++chosen == k) break;
    }
    if (chosen < k) return false;
    return factor(Xa, y);
  }

  // Runs pivots until the vertex is certified or no descent edge exists.
  // Returns true when certified optimal.
  bool descend(const Matrix& Xa, const Vector& y, double zero_tol, std::size_t max_pivots,
               std::size_t& pivots) {
    const Eigen::Index n = Xa.rows();
    const auto k = static_cast<Eigen::Index>(basis_.size());
    for (pivots = 0; pivots <= max_pivots; ++pivots) {
      grad_.setZero();
      for (Eigen::Index i = 0; i < n; ++i) {
        if (in_basis_[static_cast<std::size_t>(i)]) continue;
        if (resid_(i) > zero_tol) {
          grad_ += Xa.row(i).transpose();
        } else if (resid_(i) < -zero_tol) {
          grad_ -= Xa.row(i).transpose();
        }
      }
      mult_ = lu_.transpose().solve(grad_);
      loosen(Xa, zero_tol);
      if (certified()) return true;
      if (pivots == max_pivots) return false;

      // Try leaving candidates in order of decreasing |h_j|.
      leave_order_.resize(static_cast<std::size_t>(k));
      std::iota(leave_order_.begin(), leave_order_.end(), Eigen::Index{0});
      std::sort(leave_order_.begin(), leave_order_.end(),
                [&](Eigen::Index a, Eigen::Index b) {
                  return std::fabs(mult_(a)) - bound_(a) > std::fabs(mult_(b)) - bound_(b);
                });
      bool moved = false;
      for (const Eigen::Index j : leave_order_) {
        if (std::fabs(mult_(j)) <= bound_(j) + 1e-9) break;
        if (pivot(Xa, y, j, mult_(j) > 0.0 ? 1.0 : -1.0, zero_tol)) {
          moved = true;
          break;
        }
      }
      if (!moved) return false;
    }
    return false;
  }

  const Vector& coefficients() const noexcept { return beta_; }
  const Vector& residuals() const noexcept { return resid_; }

 private:
  // In coordinates u = X_B d the directional derivative at the vertex is
  // h.u + sum_j |u_j| + sum over tied non-basis rows of |c_i.u|, with
  // c_i = X_B^-T x_i. A tied row whose c_i has a single nonzero entry (a
  // repeated basis row, say) adds |c_ij| to the bound on h_j. Other tied rows
  // are ignored, which keeps the certificate sufficient.
  void loosen(const Matrix& Xa, double zero_tol) {
    bound_.setOnes();
    for (Eigen::Index i = 0; i < Xa.rows(); ++i) {
      if (in_basis_[static_cast<std::size_t>(i)] || std::fabs(resid_(i)) > zero_tol) continue;
      const Vector c = lu_.transpose().solve(Xa.row(i).transpose());
      Eigen::Index top = 0;
      const double peak = c.cwiseAbs().maxCoeff(&top);
      if (peak == 0.0) continue;
      if ((c.cwiseAbs().array() > 1e-9 * peak).count() == 1) bound_(top) += peak;
    }
  }

  bool certified() const {
    return (mult_.cwiseAbs() - bound_).maxCoeff() <= 1e-9;
  }

  bool factor(const Matrix& Xa, const Vector& y) {
    std::fill(in_basis_.begin(), in_basis_.end(), 0);
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      const auto row = basis_[j];
      xb_.row(static_cast<Eigen::Index>(j)) = Xa.row(row);
      yb_(static_cast<Eigen::Index>(j)) = y(row);
      in_basis_[static_cast<std::size_t>(row)] = 1;
    }
    lu_.compute(xb_);
    if (!lu_.isInvertible() || lu_.rcond() < 1e-12) return false;
    beta_ = lu_.solve(yb_);
    resid_.noalias() = y - Xa * beta_;
    return true;
  }

  // Moves along beta + t * dir with X_B dir = sign * e_j, t >= 0. Along the
  // edge the objective is convex piecewise linear with slope 1 at the leaving
  // point plus one kink per non-basis observation.
  bool pivot(const Matrix& Xa, const Vector& y, Eigen::Index j, double sign, double zero_tol) {
    const Eigen::Index n = Xa.rows();
    Vector unit = Vector::Zero(static_cast<Eigen::Index>(basis_.size()));
    unit(j) = sign;
    dir_ = lu_.solve(unit);
    slope_.noalias() = Xa * dir_;

    double slope = 1.0;
    kinks_.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_basis_[static_cast<std::size_t>(i)]) continue;
      const double a = slope_(i);
      if (a == 0.0) continue;
      const double e = resid_(i);
      if (std::fabs(e) <= zero_tol) {
        slope += std::fabs(a);
        continue;
      }
      const double t = e / a;
      if (t > 0.0) {
        slope -= std::fabs(a);
        kinks_.push_back({t, i, std::fabs(a)});
      } else {
        slope += std::fabs(a);
      }
    }
    if (slope >= 0.0) return false;
    std::sort(kinks_.begin(), kinks_.end(),
              [](const Kink& a, const Kink& b) { return a.t < b.t || (a.t == b.t && a.row < b.row); });
    for (const auto& kink : kinks_) {
      slope += 2.0 * kink.weight;
      if (slope >= 0.0) {
        const auto previous = basis_[static_cast<std::size_t>(j)];
        basis_[static_cast<std::size_t>(j)] = kink.row;
        if (factor(Xa, y)) return true;
        basis_[static_cast<std::size_t>(j)] = previous;
        factor(Xa, y);
        return false;
      }
    }
    return false;
  }

  struct Kink {
    double t;
    Eigen::Index row;
    double weight;
  };

  std::vector<Eigen::Index> basis_;
  std::vector<char> in_basis_;
  std::vector<Eigen::Index> order_;
  std::vector<Eigen::Index> leave_order_;
  std::vector<Kink> kinks_;
  Matrix xb_;
  Vector yb_;
  Vector grad_;
  Vector mult_;
  Vector bound_;
  Vector dir_;
  Vector slope_;
  Vector beta_;
  Vector resid_;
  Eigen::FullPivLU<Matrix> lu_;
};

}  // namespace

double response_scale(const Vector& y) {
  if (y.size() == 0) return 1.0;
  const double mad = (y.array() - y.mean()).abs().mean();
  if (mad > 0.0 && std::isfinite(mad)) return mad;
  const double top = y.cwiseAbs().maxCoeff();
  return top > 0.0 ? top : 1.0;
}

double objective_l1(const Vector& coefficients, const Dataset& data) {
  if (coefficients.size() != data.num_columns()) {
    throw ParameterError("objective_l1: " + std::to_string(coefficients.size()) +
                         " coefficients for " + std::to_string(data.num_columns()) + " columns");
  }
  return (data.y - data.design() * coefficients).cwiseAbs().sum();
}

LadFit lad_fit(const Dataset& data, const LadOptions& options) {
  data.validate(data.num_columns() + 1);
  if (!(options.tol > 0.0)) throw ParameterError("lad_fit: tol must be > 0");
  if (options.max_iter < 1) throw ParameterError("lad_fit: max_iter must be >= 1");

  const Matrix Xa = data.design();
  const Vector& y = data.y;
  const double scale = response_scale(y);
  const double eps_floor = 1e-10 * scale;
  const double eps_handoff = options.handoff * scale;
  const double zero_tol = 1e-12 * scale;
  double eps = 1e-2 * scale;

  Vector beta = least_squares(Xa, y);
  Vector resid = y - Xa * beta;

  LadFit best;
  best.coefficients = beta;
  best.residuals = resid;
  best.objective = resid.cwiseAbs().sum();

  WeightedSolver solver(Xa.rows(), Xa.cols());
  VertexDescent vertex(Xa.rows(), Xa.cols());
  Vector sqrt_w(Xa.rows());
  Vector step(Xa.rows());
  std::size_t iter = 0;
  bool converged = false;
  bool tried_vertex = false;
  while (iter < options.max_iter) {
    ++iter;
    const bool at_floor = eps <= eps_floor;
    const double eps2 = eps * eps;
    for (Eigen::Index i = 0; i < resid.size(); ++i) {
      sqrt_w(i) = 1.0 / std::sqrt(std::sqrt(resid(i) * resid(i) + eps2));
    }
    const Vector& next = solver.solve(Xa, y, sqrt_w);
    step.noalias() = Xa * (next - beta);
    beta = next;
    resid = y - Xa * beta;

    const double obj = resid.cwiseAbs().sum();
    if (obj <= best.objective) {
      best.coefficients = beta;
      best.residuals = resid;
      best.objective = obj;
    }

    if (eps <= eps_handoff && !tried_vertex && vertex.seed(Xa, y, resid)) {
      tried_vertex = true;
      std::size_t pivots = 0;
      const bool optimal = vertex.descend(Xa, y, zero_tol, options.max_pivots, pivots);
      iter += pivots;
      const double vobj = vertex.residuals().cwiseAbs().sum();
      if (vobj <= best.objective) {
        best.coefficients = vertex.coefficients();
        best.residuals = vertex.residuals();
        best.objective = vobj;
      }
      if (optimal) {
        converged = true;
        break;
      }
    }
    if (at_floor && step.cwiseAbs().maxCoeff() < options.tol * scale) {
      converged = true;
      break;
    }
    eps = std::max(0.5 * eps, eps_floor);
  }
  best.iterations = iter;
  best.converged = converged;
  return best;
}

LadFit lad_fit_exact(const Dataset& data) {
  data.validate(data.num_columns());
  const auto n = static_cast<std::size_t>(data.n());
  const auto k = static_cast<std::size_t>(data.num_columns());
  if (n > 14 || k > 3) {
    throw SizeError("lad_fit_exact: instance too large (n=" + std::to_string(n) +
                    ", k=" + std::to_string(k) + "; limits n<=14, k<=3)");
  }
  const Matrix Xa = data.design();
  const double tie_tol = 1e-12 * response_scale(data.y) * static_cast<double>(n);

  LadFit best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
  Matrix A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Vector b(static_cast<Eigen::Index>(k));
  std::size_t evaluated = 0;
  do {
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pick[i]) continue;
      A.row(row) = Xa.row(static_cast<Eigen::Index>(i));
      b(row) = data.y(static_cast<Eigen::Index>(i));
      ++row;
    }
    Eigen::FullPivLU<Matrix> lu(A);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) continue;
    const Vector coef = lu.solve(b);
    ++evaluated;
    const double obj = (data.y - Xa * coef).cwiseAbs().sum();
    const bool better = obj < best.objective - tie_tol;
    const bool tie = !better && obj <= best.objective + tie_tol;
    if (better ||
        (tie && std::lexicographical_compare(coef.begin(), coef.end(),
                                             best.coefficients.begin(), best.coefficients.end()))) {
      best.coefficients = coef;
      best.objective = obj;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));

  if (evaluated == 0) {
    throw SingularDesignError("lad_fit_exact: every interpolating subset is singular", {});
  }
  best.residuals = data.y - Xa * best.coefficients;
  best.objective = best.residuals.cwiseAbs().sum();
  best.iterations = evaluated;
  best.converged = true;
  return best;
}

}  // namespace hetbias
