#include <doctest.h>

#include <cmath>
#include <vector>

#include "hetbias/errors.hpp"
#include "hetbias/numerics.hpp"
#include "oracles.hpp"

using namespace hetbias;

TEST_CASE("rng_new: identical (seed, stream) replays the same draws") {
  auto a = rng_new(42, 0);
  auto b = rng_new(42, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng_new: streams differ") {
  auto a = rng_new(42, 0);
  auto b = rng_new(42, 1);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
  CHECK(same == 0);
}

TEST_CASE("rng_new: seed 0 is a valid generator") {
  auto g = rng_new(0, 0);
  const auto first = g.next_u64();
  bool varied = false;
  for (int i = 0; i < 10; ++i) varied |= g.next_u64() != first;
  CHECK(varied);
}

TEST_CASE("RngState is a value: copies continue identically") {
  auto a = rng_new(7, 3);
  a.next_u64();
  a.next_u64();
  a.next_u64();
  auto b = a;
  for (int i = 0; i < 20; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("uniform_index stays in range and covers it") {
  auto g = rng_new(5, 0);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = g.uniform_index(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) CHECK(h > 800);
}

TEST_CASE("normal_quantile inverts the normal CDF") {
  for (double p : {1e-300, 1e-20, 1e-8, 0.001, 0.025, 0.2, 0.5, 0.7, 0.975, 0.999999}) {
    const double x = normal_quantile(p);
    const double back = 0.5 * std::erfc(-x / std::sqrt(2.0));
    CHECK(back == doctest::Approx(p).epsilon(1e-13));
  }
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
  CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("sample_normal: degenerate sigma gives the mean") {
  auto g = rng_new(1, 0);
  const Vector v = sample_normal(g, 3.0, 0.0, 5);
  for (double x : v) CHECK(x == 3.0);
}

TEST_CASE("sample_normal: moments at n = 100000") {
  auto g = rng_new(2024, 0);
  const Vector v = sample_normal(g, 0.0, 2.0, 100000);
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().sum() / (v.size() - 1));
  CHECK(std::fabs(mean) < 0.03);
  CHECK(std::fabs(sd - 2.0) < 0.03);
}

TEST_CASE("sample_normal: replay from the same state") {
  auto a = rng_new(9, 9);
  auto b = a;
  CHECK(sample_normal(a, 1.0, 2.0, 50) == sample_normal(b, 1.0, 2.0, 50));
}

TEST_CASE("sample_normal: negative sigma is a parameter error") {
  auto g = rng_new(1, 0);
  CHECK_THROWS_AS(sample_normal(g, 0.0, -1.0, 3), ParameterError);
}

TEST_CASE("sample_normal passes Kolmogorov-Smirnov at alpha = 0.001") {
  auto g = rng_new(77, 0);
  const Vector v = sample_normal(g, 1.5, 0.7, 100000);
  const double d = oracle::ks_normal(std::vector<double>(v.begin(), v.end()), 1.5, 0.7);
  // Asymptotic critical value 1.9495 / sqrt(n).
  CHECK(d < 1.9495 / std::sqrt(100000.0));
}

TEST_CASE("least_squares: perfect fit") {
  Matrix X(3, 2);
  X << 1, 0, 1, 1, 1, 2;
  Vector y(3);
  y << 1, 3, 5;
  const Vector b = least_squares(X, y);
  CHECK(b(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b(1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("least_squares: matches the hand-solved normal equations") {
  Matrix X(3, 2);
  X << 1, 0, 1, 1, 1, 2;
  Vector y(3);
  y << 0, 1, 1;
  const Vector b = least_squares(X, y);
  CHECK(b(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(b(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("least_squares: duplicated column names the dependent columns") {
  Matrix X(4, 3);
  X << 1, 0, 0, 1, 1, 1, 1, 2, 2, 1, 5, 5;
  Vector y(4);
  y << 1, 2, 3, 4;
  try {
    least_squares(X, y);
    FAIL("expected SingularDesignError");
  } catch (const SingularDesignError& e) {
    REQUIRE(e.columns().size() == 1);
    CHECK((e.columns()[0] == 1 || e.columns()[0] == 2));
  }
}

TEST_CASE("least_squares: shape errors") {
  CHECK_THROWS_AS(least_squares(Matrix::Ones(2, 2), Vector::Ones(2)), ParameterError);
  CHECK_THROWS_AS(least_squares(Matrix::Ones(3, 1), Vector::Ones(4)), ParameterError);
}

TEST_CASE("least_squares: residual orthogonality on random designs") {
  auto g = rng_new(11, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 20 + trial;
    Matrix X(n, 4);
    X.col(0).setOnes();
    for (int j = 1; j < 4; ++j) X.col(j) = sample_normal(g, 0.0, std::pow(10.0, j - 2), static_cast<std::size_t>(n));
    const Vector y = sample_normal(g, 5.0, 3.0, static_cast<std::size_t>(n));
    const Vector b = least_squares(X, y);
    const Vector e = y - X * b;
    const double scale = X.norm() * y.norm();
    CHECK((X.transpose() * e).cwiseAbs().maxCoeff() < 1e-8 * scale);
    CHECK((b - oracle::normal_equations(X, y)).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + b.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("mix_seed spreads nearby inputs") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(0, 1));
  CHECK(mix_seed(5, 5) == mix_seed(5, 5));
}
