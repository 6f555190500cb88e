#include "prb/power.hpp"

#include <stdexcept>
#include <string>

namespace prb {

void PowerParams::validate() const {
  if (!(static_power() < 1.0)) throw std::invalid_argument("power: static terms must sum below 1");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("power: eta must lie in (0, 1]");
  if (max_prb <= 0) throw std::invalid_argument("power: max_prb must be positive");
}

double load_ratio(double alloc_prbs, const PowerParams& params) {
  if (!(alloc_prbs >= 0.0 && alloc_prbs <= params.max_prb)) {
    throw std::out_of_range("load_ratio: allocation " + std::to_string(alloc_prbs) + " outside [0, " +
                            std::to_string(params.max_prb) + "]");
  }
  return alloc_prbs / params.max_prb;
}

double p_out(double ratio, const PowerParams& params) { return params.p_out_full() * ratio; }

double total_power(double ratio, const PowerParams& params) {
  return params.static_power() + p_out(ratio, params);
}

PowerSaving power_saving(std::span<const double> alloc, const PowerParams& params) {
  PowerSaving out;
  out.per_hour_percent.reserve(alloc.size());
  const double full = p_out(1.0, params);
  double sum = 0.0;
  for (double a : alloc) {
    const double s = 100.0 * (full - p_out(load_ratio(a, params), params)) / full;
    out.per_hour_percent.push_back(s);
    sum += s;
  }
  if (!alloc.empty()) out.mean_percent = sum / static_cast<double>(alloc.size());
  return out;
}

PowerSaving power_saving(std::span<const int> alloc, const PowerParams& params) {
  const std::vector<double> real(alloc.begin(), alloc.end());
  return power_saving(std::span<const double>(real), params);
}

}  // namespace prb
