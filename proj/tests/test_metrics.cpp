#include <doctest.h>

#include <cmath>
#include <vector>

#include "prb/metrics.hpp"
#include "oracles.hpp"
#include "prb/random.hpp"

using namespace prb;

namespace oracle = prb::testing::oracle;

TEST_CASE("point errors: hand examples") {
  const std::vector<double> y{10, 10}, p{9, 11};
  const auto e = point_errors(y, p);
  CHECK(e.mse == 1.0);
  CHECK(e.mae == 1.0);
  CHECK(e.mape_percent == doctest::Approx(10.0).epsilon(1e-15));
  const auto z = point_errors(y, y);
  CHECK(z.mse == 0.0);
  CHECK(z.mae == 0.0);
  CHECK(z.mape_percent == 0.0);
}

TEST_CASE("point errors: zero truth is a MAPE domain error naming the index") {
  const std::vector<double> y{3, 0, 2}, p{1, 1, 1};
  try {
    point_errors(y, p);
    FAIL("expected MetricsError");
  } catch (const MetricsError& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }
  CHECK_THROWS_AS(point_errors(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), MetricsError);
}

TEST_CASE("normalized deviation examples") {
  const std::vector<double> y{10, 10};
  CHECK(normalized_deviation(y, y) == 0.0);
  CHECK(normalized_deviation(y, std::vector<double>{0, 0}) == 1.0);
  CHECK(normalized_deviation(y, std::vector<double>{9, 11}) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(normalized_deviation(std::vector<double>{0, 0}, y), MetricsError);
}

TEST_CASE("quantile loss examples") {
  const std::vector<double> y{10};
  CHECK(quantile_loss(y, std::vector<double>{8}, 0.9) == doctest::Approx(3.6).epsilon(1e-15));
  CHECK(quantile_loss(y, y, 0.3) == 0.0);
  CHECK_THROWS_AS(quantile_loss(y, y, 0.0), MetricsError);
  CHECK_THROWS_AS(quantile_loss(y, y, 1.0), MetricsError);
}

TEST_CASE("coverage and provisioning conventions") {
  const std::vector<double> y{5, 5};
  CHECK(coverage(y, y) == 1.0);
  CHECK(coverage(y, std::vector<double>{4.9, 4.0}) == 0.0);
  const auto p = provisioning(y, std::vector<int>{5, 4});
  CHECK(p.over_percent == 50.0);
  CHECK(p.under_percent == 50.0);
  const auto full = provisioning(y, std::vector<int>{160, 160});
  CHECK(full.over_percent == 100.0);
  CHECK(full.under_percent == 0.0);
}

TEST_CASE("coverage of an ideal quantile matches its level") {
  Rng rng(31);
  const std::size_t n = 10000;
  std::vector<double> truth(n);
  for (double& v : truth) v = rng.normal();
  // 0.9 quantile of N(0, 1).
  const std::vector<double> q90(n, 1.2815515655446004);
  CHECK(std::abs(coverage(truth, q90) - 0.9) < 0.05);
  const std::vector<double> q50(n, 0.0);
  CHECK(std::abs(coverage(truth, q50) - 0.5) < 0.05);
}

TEST_CASE("metrics equal a brute-force oracle on randomized vectors") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 60);
    std::vector<double> y(n), p(n), qp(n);
    std::vector<int> a(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform(0.5, 160.0);
      p[i] = y[i] + 10.0 * rng.normal();
      qp[i] = rng.uniform() < 0.1 ? y[i] : y[i] + 15.0 * rng.normal();
      a[i] = rng.uniform() < 0.1 ? static_cast<int>(std::ceil(y[i]))
                                 : static_cast<int>(rng.uniform(0.0, 161.0));
    }
    const double q = rng.uniform(0.01, 0.99);
    const auto e = point_errors(y, p);
    CHECK(e.mse == oracle::mse(y, p));
    CHECK(e.mae == oracle::mae(y, p));
    CHECK(e.mape_percent == oracle::mape(y, p));
    CHECK(normalized_deviation(y, p) == oracle::nd(y, p));
    CHECK(quantile_loss(y, qp, q) == oracle::qloss(y, qp, q));
    CHECK(coverage(y, qp) == oracle::cover(y, qp));
    const auto pr = provisioning(y, a);
    const auto [over, under] = oracle::prov(y, a);
    CHECK(pr.over_percent == over);
    CHECK(pr.under_percent == under);
    CHECK(pr.over_percent + pr.under_percent == 100.0);
    CHECK(std::abs(quantile_loss(y, p, 0.5) - e.mae) <= 1e-12 * std::max(1.0, e.mae));
    CHECK(e.mae <= std::sqrt(e.mse) * (1 + 1e-15));
  }
}
