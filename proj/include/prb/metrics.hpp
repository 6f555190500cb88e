#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace prb {

class MetricsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PointErrors {
  double mse = 0.0;
  double mae = 0.0;
  double mape_percent = 0.0;
};

struct Provisioning {
  double over_percent = 0.0;   // allocation >= demand, ties included
  double under_percent = 0.0;  // allocation < demand
};

// Throws MetricsError on length mismatch, empty input, or a zero truth value (MAPE).
PointErrors point_errors(std::span<const double> truth, std::span<const double> pred);
// sum |y - yhat| / sum |y|.
double normalized_deviation(std::span<const double> truth, std::span<const double> pred);
// (2 / H) * sum of pinball losses at level q.
double quantile_loss(std::span<const double> truth, std::span<const double> qpred, double q);
// Fraction of steps with truth <= qpred.
double coverage(std::span<const double> truth, std::span<const double> qpred);
Provisioning provisioning(std::span<const double> truth, std::span<const int> alloc);

struct PercentileMetrics {
  double percentile = 0.0;
  double quantile_loss = 0.0;
  double coverage = 0.0;
  Provisioning provisioning;
};

struct MetricsReport {
  double mse = 0.0;
  double mae = 0.0;
  double mape_percent = 0.0;
  double nd = 0.0;
  std::vector<PercentileMetrics> percentiles;  // in configured order
};

}  // namespace prb
