#pragma once

#include <span>
#include <vector>

namespace prb {

// Normalized base-station power model: static terms plus an output term linear in PRB load.
struct PowerParams {
  double p0 = 0.22;
  double p_bb = 0.16;
  double p_tran = 0.09408;
  double p_pa = 0.24382;
  double p_tx_dbm = 43.0;  // informational
  double eta = 0.4;        // informational
  int max_prb = 160;
  int rf_chains = 64;
  int carriers = 1;

  double static_power() const { return p0 + p_bb + p_tran + p_pa; }
  // Output power at full load, chosen so that total power at full load is 1.
  double p_out_full() const { return 1.0 - static_power(); }
  void validate() const;
};

double load_ratio(double alloc_prbs, const PowerParams& params);
double p_out(double ratio, const PowerParams& params);
double total_power(double ratio, const PowerParams& params);

struct PowerSaving {
  std::vector<double> per_hour_percent;
  double mean_percent = 0.0;
};

// Saving relative to full-load output power, per hour and averaged.
PowerSaving power_saving(std::span<const int> alloc, const PowerParams& params);
PowerSaving power_saving(std::span<const double> alloc, const PowerParams& params);

}  // namespace prb
