#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prb/likelihoods.hpp"
#include "prb/nn/graph.hpp"
#include "prb/nn/parameters.hpp"
#include "prb/random.hpp"
#include "prb/traces.hpp"

namespace prb {

enum class ModelKind { SFF, DeepAR, Transformer, LSTM };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::LSTM, ModelKind::SFF, ModelKind::DeepAR,
                                               ModelKind::Transformer};

std::string to_string(ModelKind kind);
// Case-insensitive; accepts "sff", "deepar", "transformer", "lstm".
ModelKind parse_model_kind(std::string_view name);
inline bool is_probabilistic(ModelKind kind) { return kind != ModelKind::LSTM; }

struct ForecasterConfig {
  ModelKind kind = ModelKind::DeepAR;
  std::size_t context_len = 24;
  std::size_t horizon = 24;
  int epochs = 5;
  std::size_t batch_size = 1;
  std::size_t num_samples = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  // SFF
  std::vector<std::size_t> sff_hidden = {40, 40};
  // DeepAR
  std::size_t rnn_layers = 2;
  std::size_t rnn_cells = 40;
  // Transformer
  std::size_t model_dim = 32;
  std::size_t ff_scale = 4;
  std::size_t heads = 8;
  std::size_t blocks = 2;
  // LSTM baseline
  std::size_t lstm_cells = 40;

  static ForecasterConfig defaults(ModelKind kind, std::uint64_t seed = 0);
  void validate() const;
};

// Monte Carlo forecast: samples is num_samples x horizon in PRBs.
struct ForecastResult {
  nn::Tensor samples;
  std::optional<std::vector<double>> point;
  std::size_t origin = 0;

  std::size_t num_samples() const { return samples.rows(); }
  std::size_t horizon() const { return samples.cols(); }
};

struct TrainedModel {
  ForecasterConfig config;
  nn::ParameterSet parameters;
  double scale = 1.0;  // training-series mean
  std::vector<double> epoch_losses;  // mean per-window training loss of each epoch
  double final_loss = 0.0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Trains on every stride-1 window of the training series. Deterministic per config.seed.
TrainedModel fit(const ForecasterConfig& config, const PrbSeries& train);

// Samples a forecast for the horizon that follows `context`. The calendar point is
// the position of context[0]; models without calendar inputs ignore it.
ForecastResult predict(const TrainedModel& model, std::span<const double> context, Rng& rng,
                       CalendarPoint context_start = {}, std::size_t origin = 0);

// Per-timestep empirical quantile, linear interpolation at position (n - 1) q.
std::vector<double> forecast_quantile(const ForecastResult& result, double q);

// Building blocks used by fit, exposed for gradient checks and diagnostics.
// Windows passed here are already divided by the model scale.
nn::ParameterSet init_parameters(const ForecasterConfig& config);
nn::Var training_loss(const ForecasterConfig& config, nn::Graph& graph, nn::ParameterSet& params,
                      const WindowPair& scaled_window);
// Teacher-forced predictive distribution of each target step (probabilistic kinds, scaled units).
std::vector<LikelihoodParams> teacher_forced_params(const ForecasterConfig& config,
                                                    nn::ParameterSet& params,
                                                    const WindowPair& scaled_window);

// Checkpoint plus JSON sidecar "<stem>.json" holding the config and scale.
void save_model(const TrainedModel& model, const std::filesystem::path& checkpoint);
TrainedModel load_model(const std::filesystem::path& checkpoint);
std::string config_to_json(const ForecasterConfig& config);
ForecasterConfig config_from_json(const std::string& text);

}  // namespace prb
