#pragma once

#include <vector>

#include "prb/forecasters.hpp"

namespace prb {

struct AllocationPolicy {
  double percentile = 0.5;  // in (0, 1); rounding is always ceil, clamped to [0, max_prb]
};

struct AllocationPlan {
  std::vector<int> prbs;
  AllocationPolicy policy;
  ModelKind model_kind = ModelKind::DeepAR;
};

// prbs_t = clamp(ceil(quantile_t), 0, max_prb).
AllocationPlan allocate(const ForecastResult& result, const AllocationPolicy& policy, int max_prb,
                        ModelKind kind = ModelKind::DeepAR);
int allocate_value(double quantile, int max_prb);

}  // namespace prb
