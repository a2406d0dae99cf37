#include <doctest.h>

#include <cmath>
#include <vector>

#include "gf/rng.hpp"
#include "gf/seldonian.hpp"
#include "gf/stats.hpp"

using namespace gf;
using seldonian::BoundParams;

TEST_SUITE("bounds") {

TEST_CASE("t quantiles match published tables") {
  // One-sided levels from standard t tables.
  CHECK(stats::student_t_quantile(0.90, 2) == doctest::Approx(1.885618).epsilon(1e-5));
  CHECK(stats::student_t_quantile(0.95, 9) == doctest::Approx(1.833113).epsilon(1e-5));
  CHECK(stats::student_t_quantile(0.80, 29) == doctest::Approx(0.854192).epsilon(1e-5));
  CHECK(stats::student_t_quantile(0.5, 7) == doctest::Approx(0.0));
  CHECK(stats::student_t_quantile(0.1, 5) == doctest::Approx(-stats::student_t_quantile(0.9, 5)));
}

TEST_CASE("t cdf and quantile invert each other") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const double p = rng.uniform(0.01, 0.99);
    const double dof = 1.0 + rng.bounded(40);
    const double t = stats::student_t_quantile(p, dof);
    CHECK(stats::student_t_cdf(t, dof) == doctest::Approx(p).epsilon(1e-8));
  }
}

TEST_CASE("upper bound reproduces the worked example") {
  const std::vector<double> z{0.1, 0.2, 0.3};
  // 0.2 + (0.1/sqrt(3)) * t_{0.9,2}; frozen from the independent computation.
  CHECK(seldonian::upper_bound_values(z, 0.1) ==
        doctest::Approx(0.3088662107903649).epsilon(1e-9));
}

TEST_CASE("zero variance collapses the bound to the mean") {
  const std::vector<double> z{0.42, 0.42, 0.42, 0.42};
  CHECK(seldonian::upper_bound_values(z, 0.05) == doctest::Approx(0.42));
  CHECK(seldonian::predicted_bound_values(z, BoundParams{0.05, 10, 2.0}) ==
        doctest::Approx(0.42));
}

TEST_CASE("delta of one half keeps only the mean") {
  const std::vector<double> z{0.1, 0.4, 0.4, 0.7};
  CHECK(seldonian::upper_bound_values(z, 0.5) == doctest::Approx(0.4));
}

TEST_CASE("fewer than two samples is a sizing error") {
  const std::vector<double> z{0.3};
  CHECK_THROWS_AS(static_cast<void>(seldonian::upper_bound_values(z, 0.1)), Error);
}

TEST_CASE("predicted bound collapses to the upper bound at inflation one") {
  const std::vector<double> z{0.12, 0.55, 0.31, 0.84, 0.02};
  const BoundParams collapse{0.2, static_cast<int>(z.size()), 1.0};
  CHECK(seldonian::predicted_bound_values(z, collapse) ==
        doctest::Approx(seldonian::upper_bound_values(z, 0.2)));
}

TEST_CASE("predicted bound reproduces the inflated worked example") {
  const std::vector<double> z{0.1, 0.2, 0.3};
  CHECK(seldonian::predicted_bound_values(z, BoundParams{0.1, 3, 2.0}) ==
        doctest::Approx(0.41773242158072976).epsilon(1e-9));
}

TEST_CASE("predicted bound dominates the upper bound when it anticipates a smaller safety set") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 3 + static_cast<int>(rng.bounded(12));
    std::vector<double> z;
    for (int i = 0; i < m; ++i) z.push_back(rng.uniform(0.0, 2.0));
    const double delta = rng.uniform(0.05, 0.4);
    const int safety = 2 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(m - 1)));
    const double inflation = 1.0 + rng.uniform(0.0, 2.0);
    const BoundParams params{delta, safety, inflation};
    CHECK(seldonian::predicted_bound_values(z, params) >=
          seldonian::upper_bound_values(z, delta) - 1e-12);
  }
}

}  // TEST_SUITE
