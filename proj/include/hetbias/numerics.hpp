#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace hetbias {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Counter-based generator (Philox4x32-10). The key is the seed, the upper half
/// of the counter is the stream, so (seed, stream) addresses an independent
/// sequence and any stream can be replayed in isolation.
class RngState {
 public:
  RngState(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;

  /// Standard normal draw by inversion of the normal CDF (one uniform per draw).
  double standard_normal() noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

RngState rng_new(std::uint64_t seed, std::uint64_t stream) noexcept;

/// n draws of N(mu, sigma); sigma is a standard deviation.
Vector sample_normal(RngState& rng, double mu, double sigma, std::size_t n);

/// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative).
double normal_quantile(double p);

/// Upper tail of the standard normal.
double normal_sf(double x);

/// SplitMix64 finalizer over a pair; used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

/// Condition bound above which a design is treated as singular.
inline constexpr double kConditionLimit = 1e12;

/// Least-squares coefficients via column-pivoted Householder QR on the
/// column-equilibrated design. Throws SingularDesignError naming the columns
/// that fall below the condition screen.
Vector least_squares(const Matrix& X, const Vector& y);

/// Reusable solver for min ||diag(sqrt_w) (y - X b)||, used by IRLS loops that
/// solve many systems of the same shape. No condition screen: the caller is
/// expected to have checked the unweighted design.
class WeightedSolver {
 public:
  WeightedSolver(Eigen::Index rows, Eigen::Index cols);

  /// Throws SingularDesignError when a pivot of R vanishes.
  const Vector& solve(const Matrix& X, const Vector& y, const Vector& sqrt_w);

 private:
  Matrix xw_;
  Vector yw_;
  Vector coef_;
  Eigen::HouseholderQR<Matrix> qr_;
};

/// Throws ParameterError if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

}  // namespace hetbias
