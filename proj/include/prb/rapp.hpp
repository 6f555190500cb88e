#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prb/forecasters.hpp"
#include "prb/metrics.hpp"
#include "prb/power.hpp"
#include "prb/traces.hpp"

namespace prb {

struct CsvTrace {
  std::filesystem::path path;
};

using TraceSource = std::variant<TraceConfig, CsvTrace>;

struct ExperimentConfig {
  TraceSource trace = TraceConfig{};
  double train_fraction = 0.8;
  std::vector<ForecasterConfig> models;  // seeds are derived from `seed` at run time
  std::vector<double> percentiles = {0.05, 0.25, 0.50, 0.75, 0.90, 0.99};
  PowerParams power;
  std::filesystem::path output_dir = "prb_out";
  std::uint64_t seed = 7;

  // All four models with their default hyperparameters.
  static ExperimentConfig defaults();
  void validate() const;
};

// Relative CSV paths are resolved against base_dir. Missing keys keep their defaults.
ExperimentConfig experiment_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);
std::string experiment_to_json(const ExperimentConfig& config);

// Per-model seed: fixed stream of the global seed, independent of which models run.
std::uint64_t model_seed(std::uint64_t global_seed, ModelKind kind);

struct PercentileOutcome {
  double percentile = 0.0;
  std::vector<double> quantiles;  // pooled over windows
  std::vector<int> allocations;
  PowerSaving saving;
};

struct ModelReport {
  ModelKind kind = ModelKind::DeepAR;
  std::vector<double> epoch_losses;
  double final_loss = 0.0;
  double scale = 1.0;
  std::vector<double> median;  // pooled median forecast
  MetricsReport metrics;
  std::vector<PercentileOutcome> outcomes;  // aligned with metrics.percentiles
};

struct BaselineReport {
  std::string name;
  std::vector<int> allocations;
  PowerSaving saving;
  Provisioning provisioning;
};

struct SustainabilityReport {
  ExperimentConfig config;
  std::size_t series_length = 0;
  std::size_t train_length = 0;
  std::size_t test_length = 0;
  std::vector<std::size_t> window_origins;  // t0 index of each evaluation window
  std::vector<std::string> timestamps;      // pooled, one per evaluated hour
  std::vector<double> truth;                // pooled
  std::vector<ModelReport> models;
  BaselineReport true_data;                          // allocation = ceil(truth)
  PointErrors seasonal_naive;                        // value 24 h earlier
  double seasonal_naive_nd = 0.0;
  std::size_t horizon = 0;

  const ModelReport* find(ModelKind kind) const;
  // LSTM allocation baseline, present when the LSTM model ran.
  std::optional<BaselineReport> lstm_baseline() const;
};

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ProgressFn = std::function<void(const std::string&)>;

SustainabilityReport run_pipeline(const ExperimentConfig& config, const ProgressFn& progress = {});

std::string report_to_json(const SustainabilityReport& report);
std::string table1_csv(const SustainabilityReport& report);
std::string table2_csv(const SustainabilityReport& report);
std::string hourly_csv(const SustainabilityReport& report);
std::string provisioning_csv(const SustainabilityReport& report);
// Writes report.json, table1.csv, table2.csv, hourly.csv and provisioning.csv.
void emit_report(const SustainabilityReport& report, const std::filesystem::path& dir);

// Column label for a percentile level, e.g. 0.05 -> "p5", 0.975 -> "p97.5".
std::string percentile_label(double q);

}  // namespace prb
