#include <doctest.h>

#include <vector>

#include "prb/decision.hpp"
#include "prb/metrics.hpp"
#include "prb/power.hpp"

using namespace prb;

TEST_CASE("load ratio") {
  const PowerParams p;
  CHECK(load_ratio(160, p) == 1.0);
  CHECK(load_ratio(0, p) == 0.0);
  CHECK(load_ratio(80, p) == 0.5);
  CHECK_THROWS_AS(load_ratio(161, p), std::out_of_range);
  CHECK_THROWS_AS(load_ratio(-1, p), std::out_of_range);
}

TEST_CASE("power model with the default fitted constants") {
  const PowerParams p;
  CHECK(total_power(1.0, p) == 1.0);
  CHECK(total_power(0.0, p) == 0.7179);
  CHECK(p_out(1.0, p) == doctest::Approx(0.2821).epsilon(1e-12));
  CHECK(p_out(0.0, p) == 0.0);
  CHECK(p_out(0.5, p) == p_out(1.0, p) / 2);
  double prev = -1;
  for (double r = 0; r <= 1.0; r += 0.01) {
    CHECK(total_power(r, p) >= prev);
    prev = total_power(r, p);
  }
}

TEST_CASE("power saving examples") {
  const PowerParams p;
  CHECK(power_saving(std::vector<int>(24, 160), p).mean_percent == 0.0);
  CHECK(power_saving(std::vector<int>(24, 0), p).mean_percent == 100.0);
  const auto half = power_saving(std::vector<int>(24, 80), p);
  CHECK(half.mean_percent == 50.0);
  CHECK(half.per_hour_percent.size() == 24);
  CHECK_THROWS(power_saving(std::vector<int>{200}, p));
}

TEST_CASE("power saving does not depend on the full-load output power") {
  PowerParams a;
  PowerParams b = a;
  b.p0 = 0.05;  // changes the full-load output term
  const std::vector<int> alloc{3, 17, 80, 120, 159, 44};
  const auto sa = power_saving(alloc, a);
  const auto sb = power_saving(alloc, b);
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    CHECK(sa.per_hour_percent[i] == doctest::Approx(sb.per_hour_percent[i]).epsilon(1e-12));
    CHECK(sa.per_hour_percent[i] == doctest::Approx(100.0 * (1.0 - alloc[i] / 160.0)).epsilon(1e-12));
  }
}

TEST_CASE("power saving is decreasing in every allocation") {
  const PowerParams p;
  std::vector<int> alloc{10, 50, 90};
  const double base = power_saving(alloc, p).mean_percent;
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    auto more = alloc;
    ++more[i];
    CHECK(power_saving(more, p).mean_percent < base);
  }
}

TEST_CASE("invalid power parameters are rejected") {
  PowerParams p;
  CHECK_NOTHROW(p.validate());
  p.eta = 0;
  CHECK_THROWS(p.validate());
  p = PowerParams{};
  p.p0 = 0.9;
  CHECK_THROWS(p.validate());
}

TEST_CASE("allocation rounds up and clamps") {
  CHECK(allocate_value(170.3, 160) == 160);
  CHECK(allocate_value(-2.0, 160) == 0);
  CHECK(allocate_value(19.2, 160) == 20);
  CHECK(allocate_value(20.0, 160) == 20);
}

TEST_CASE("allocation plans are monotone in the percentile and idempotent") {
  nn::Tensor samples(7, 3, std::vector<double>{12.5, -3, 170, 8.1, 40, 150, 19.2, 2, 159.5,
                                               30.7, 17, 161, 0.2, 5, 140, 25, 9, 155, 14, 11, 158});
  const ForecastResult r{samples, std::nullopt, 0};
  std::vector<int> prev(3, -1);
  for (double q : {0.05, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    const auto plan = allocate(r, {q}, 160, ModelKind::SFF);
    CHECK(plan.prbs == allocate(r, {q}, 160, ModelKind::SFF).prbs);
    CHECK(plan.model_kind == ModelKind::SFF);
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(plan.prbs[t] >= prev[t]);
      CHECK(plan.prbs[t] >= 0);
      CHECK(plan.prbs[t] <= 160);
    }
    prev = plan.prbs;
  }
}
