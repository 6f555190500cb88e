#include "prb/decision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prb {

int allocate_value(double quantile, int max_prb) {
  if (std::isnan(quantile)) throw std::invalid_argument("allocate: quantile is NaN");
  return static_cast<int>(std::clamp(std::ceil(quantile), 0.0, static_cast<double>(max_prb)));
}

AllocationPlan allocate(const ForecastResult& result, const AllocationPolicy& policy, int max_prb,
                        ModelKind kind) {
  AllocationPlan plan{{}, policy, kind};
  for (double v : forecast_quantile(result, policy.percentile)) plan.prbs.push_back(allocate_value(v, max_prb));
  return plan;
}

}  // namespace prb
