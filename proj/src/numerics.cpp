#include "hetbias/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hetbias/errors.hpp"

namespace hetbias {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

inline std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
inline std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

RngState::RngState(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream) {}

void RngState::refill() noexcept {
  const auto out = philox4x32_10({lo32(counter_), hi32(counter_), lo32(stream_), hi32(stream_)},
                                 {lo32(seed_), hi32(seed_)});
  ++counter_;
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  buffered_ = 2;
}

std::uint64_t RngState::next_u64() noexcept {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

double RngState::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngState::uniform_index(std::uint64_t bound) noexcept {
  // Lemire's nearly-divisionless method, unbiased.
  __extension__ using u128 = unsigned __int128;
  u128 m = static_cast<u128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngState::standard_normal() noexcept { return normal_quantile(uniform()); }

RngState rng_new(std::uint64_t seed, std::uint64_t stream) noexcept { return {seed, stream}; }

Vector sample_normal(RngState& rng, double mu, double sigma, std::size_t n) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("sample_normal: sigma must be a finite value >= 0, got " +
                         std::to_string(sigma));
  }
  if (n < 1) throw ParameterError("sample_normal: n must be >= 1");
  Vector out(static_cast<Eigen::Index>(n));
  for (auto& v : out) v = mu + sigma * rng.standard_normal();
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw ParameterError("normal_quantile: p outside [0, 1]");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(a) ^ (b + 0x632BE59BD9B4E019ull));
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw ParameterError(std::string(what) + " contains non-finite entries");
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw ParameterError(std::string(what) + " contains non-finite entries");
}

Vector least_squares(const Matrix& X, const Vector& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (y.size() != n) {
    throw ParameterError("least_squares: X has " + std::to_string(n) + " rows but y has " +
                         std::to_string(y.size()) + " entries");
  }
  if (k == 0 || n <= k) {
    throw ParameterError("least_squares: need rows > cols, got " + std::to_string(n) + "x" +
                         std::to_string(k));
  }
  require_finite(X, "design matrix");
  require_finite(y, "response");

  Vector scale(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double norm = X.col(j).norm();
    scale(j) = norm > 0.0 ? 1.0 / norm : 0.0;
  }
  const Matrix Xs = X * scale.asDiagonal();

  Eigen::ColPivHouseholderQR<Matrix> qr(Xs);
  const auto& R = qr.matrixR();
  const double lead = std::fabs(R(0, 0));
  std::vector<std::size_t> bad;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double d = std::fabs(R(j, j));
    if (lead == 0.0 || d * kConditionLimit < lead) {
      bad.push_back(static_cast<std::size_t>(qr.colsPermutation().indices()(j)));
    }
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    std::string cols;
    for (auto c : bad) cols += (cols.empty() ? "" : ", ") + std::to_string(c);
    throw SingularDesignError("singular design: column(s) " + cols +
                                  " are linearly dependent on the others",
                              std::move(bad));
  }
  const Vector coef_scaled = qr.solve(y);
  return scale.asDiagonal() * coef_scaled;
}

WeightedSolver::WeightedSolver(Eigen::Index rows, Eigen::Index cols)
    : xw_(rows, cols), yw_(rows), coef_(cols), qr_(rows, cols) {}

const Vector& WeightedSolver::solve(const Matrix& X, const Vector& y, const Vector& sqrt_w) {
  xw_.noalias() = sqrt_w.asDiagonal() * X;
  yw_ = sqrt_w.cwiseProduct(y);
  const Eigen::Index k = X.cols();
  Vector col_norm(k);
  for (Eigen::Index j = 0; j < k; ++j) col_norm(j) = xw_.col(j).norm();
  qr_.compute(xw_);
  const auto& packed = qr_.matrixQR();
  std::vector<std::size_t> bad;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double d = std::fabs(packed(j, j));
    if (!std::isfinite(d) || d <= col_norm(j) * 1e-13) bad.push_back(static_cast<std::size_t>(j));
  }
  if (!bad.empty()) {
    throw SingularDesignError("singular weighted design", std::move(bad));
  }
  coef_ = qr_.solve(yw_);
  return coef_;
}

}  // namespace hetbias
