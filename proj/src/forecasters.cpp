#include "prb/forecasters.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "models/layers.hpp"
#include "prb/nn/adam.hpp"

namespace prb {

using json = nlohmann::json;
using nn::Graph;
using nn::ParameterSet;
using nn::Tensor;

namespace {

// Independent RNG streams derived from the config seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

WindowPair scaled(const WindowPair& w, double scale) {
  WindowPair out = w;
  for (double& v : out.context) v /= scale;
  for (double& v : out.target) v /= scale;
  return out;
}

std::unique_ptr<models::Network> network_for(const ForecasterConfig& config, const ParameterSet& params) {
  return models::make_network(config, params);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SFF:
      return "SFF";
    case ModelKind::DeepAR:
      return "DeepAR";
    case ModelKind::Transformer:
      return "Transformer";
    case ModelKind::LSTM:
      return "LSTM";
  }
  throw std::logic_error("unknown model kind");
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (ModelKind k : kAllModelKinds) {
    std::string candidate = to_string(k);
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (candidate == lower) return k;
  }
  throw std::invalid_argument("unknown model kind: " + std::string(name));
}

ForecasterConfig ForecasterConfig::defaults(ModelKind kind, std::uint64_t seed) {
  ForecasterConfig c;
  c.kind = kind;
  c.seed = seed;
  return c;
}

void ForecasterConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("forecaster config: ") + what);
  };
  require(context_len > 0, "context_len must be positive");
  require(horizon > 0, "horizon must be positive");
  require(epochs >= 0, "epochs must be non-negative");
  require(batch_size > 0, "batch_size must be positive");
  require(num_samples > 0, "num_samples must be positive");
  require(learning_rate > 0 && std::isfinite(learning_rate), "learning_rate must be positive");
  require(!sff_hidden.empty(), "sff_hidden must not be empty");
  for (std::size_t w : sff_hidden) require(w > 0, "sff_hidden widths must be positive");
  require(rnn_layers > 0 && rnn_cells > 0, "rnn sizes must be positive");
  require(model_dim > 0 && ff_scale > 0 && heads > 0 && blocks > 0, "transformer sizes must be positive");
  require(model_dim % heads == 0, "model_dim must be divisible by heads");
  require(lstm_cells > 0, "lstm_cells must be positive");
}

ParameterSet init_parameters(const ForecasterConfig& config) {
  config.validate();
  ParameterSet params;
  Rng rng(derive_seed(config.seed, kInitStream));
  models::make_network(config, params, rng);
  return params;
}

nn::Var training_loss(const ForecasterConfig& config, Graph& graph, ParameterSet& params,
                      const WindowPair& scaled_window) {
  const auto net = network_for(config, params);
  return net->loss(models::Binder(graph, params), scaled_window);
}

std::vector<LikelihoodParams> teacher_forced_params(const ForecasterConfig& config,
                                                    ParameterSet& params,
                                                    const WindowPair& scaled_window) {
  const auto net = network_for(config, params);
  Graph g(false);
  return net->distributions(models::Binder(g, std::as_const(params)), scaled_window);
}

TrainedModel fit(const ForecasterConfig& config, const PrbSeries& train) {
  config.validate();
  if (train.size() < config.context_len + config.horizon) {
    throw TrainingError("insufficient data: series of length " + std::to_string(train.size()) +
                        " yields no window of context " + std::to_string(config.context_len) +
                        " + horizon " + std::to_string(config.horizon));
  }
  const auto windows = make_windows(train, config.context_len, config.horizon, 1);
  TrainedModel model;
  model.config = config;
  model.scale = train.mean();
  if (!(model.scale > 0.0)) throw TrainingError("training series mean must be positive");

  std::vector<WindowPair> data;
  data.reserve(windows.size());
  for (const auto& w : windows) data.push_back(scaled(w, model.scale));

  model.parameters = init_parameters(config);
  const auto net = network_for(config, model.parameters);
  nn::Adam adam(nn::AdamConfig{.lr = config.learning_rate});
  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));

  std::vector<std::size_t> order(data.size());
  std::vector<Tensor> accum;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);
    }
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::size_t count = end - begin;
      if (count > 1) {
        accum.clear();
        for (const auto& p : model.parameters) accum.emplace_back(p.value.rows(), p.value.cols());
      }
      for (std::size_t k = begin; k < end; ++k) {
        Graph g;
        const nn::Var loss = net->loss(models::Binder(g, model.parameters), data[order[k]]);
        const double value = g.value(loss).item();
        if (!std::isfinite(value)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", window t0=" +
                              std::to_string(data[order[k]].t0_index));
        }
        total += value;
        g.backward(loss, model.parameters);
        if (count > 1) {
          std::size_t i = 0;
          for (const auto& p : model.parameters) accum[i++].accumulate(p.grad);
        }
      }
      if (count > 1) {
        std::size_t i = 0;
        for (auto& p : model.parameters) {
          p.grad = accum[i++];
          for (double& v : p.grad.data()) v /= static_cast<double>(count);
        }
      }
      adam.step(model.parameters);
    }
    model.epoch_losses.push_back(total / static_cast<double>(data.size()));
  }
  if (!model.epoch_losses.empty()) model.final_loss = model.epoch_losses.back();
  if (!model.parameters.all_finite()) throw TrainingError("training produced non-finite parameters");
  return model;
}

ForecastResult predict(const TrainedModel& model, std::span<const double> context, Rng& rng,
                       CalendarPoint context_start, std::size_t origin) {
  const ForecasterConfig& config = model.config;
  if (context.size() != config.context_len) {
    throw std::invalid_argument("predict: context has length " + std::to_string(context.size()) +
                                ", model expects " + std::to_string(config.context_len));
  }
  std::vector<double> input(context.begin(), context.end());
  for (double& v : input) v /= model.scale;

  const auto net = network_for(config, model.parameters);
  Graph g(false);
  ForecastResult result;
  result.origin = origin;
  result.samples = net->sample(models::Binder(g, std::as_const(model.parameters)), input,
                               context_start, rng);
  for (double& v : result.samples.data()) v *= model.scale;
  if (!is_probabilistic(config.kind)) {
    const auto row = result.samples.data();
    result.point = std::vector<double>(row.begin(), row.end());
  }
  return result;
}

std::vector<double> forecast_quantile(const ForecastResult& result, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  const std::size_t n = result.samples.rows();
  if (n == 0) throw std::invalid_argument("forecast has no samples");
  std::vector<double> out(result.samples.cols());
  std::vector<double> column(n);
  const double pos = static_cast<double>(n - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (std::size_t s = 0; s < n; ++s) column[s] = result.samples(s, t);
    std::sort(column.begin(), column.end());
    out[t] = column[lo] + frac * (column[hi] - column[lo]);
  }
  return out;
}

std::string config_to_json(const ForecasterConfig& c) {
  const json doc = {
      {"kind", to_string(c.kind)},     {"context_len", c.context_len},
      {"horizon", c.horizon},          {"epochs", c.epochs},
      {"batch_size", c.batch_size},    {"num_samples", c.num_samples},
      {"learning_rate", c.learning_rate}, {"seed", c.seed},
      {"sff_hidden", c.sff_hidden},    {"rnn_layers", c.rnn_layers},
      {"rnn_cells", c.rnn_cells},      {"model_dim", c.model_dim},
      {"ff_scale", c.ff_scale},        {"heads", c.heads},
      {"blocks", c.blocks},            {"lstm_cells", c.lstm_cells},
  };
  return doc.dump(2);
}

namespace {

ForecasterConfig config_from(const json& doc) {
  ForecasterConfig c = ForecasterConfig::defaults(parse_model_kind(doc.at("kind").get<std::string>()));
  auto read = [&](const char* key, auto& field) {
    if (doc.contains(key)) doc.at(key).get_to(field);
  };
  read("context_len", c.context_len);
  read("horizon", c.horizon);
  read("epochs", c.epochs);
  read("batch_size", c.batch_size);
  read("num_samples", c.num_samples);
  read("learning_rate", c.learning_rate);
  read("seed", c.seed);
  read("sff_hidden", c.sff_hidden);
  read("rnn_layers", c.rnn_layers);
  read("rnn_cells", c.rnn_cells);
  read("model_dim", c.model_dim);
  read("ff_scale", c.ff_scale);
  read("heads", c.heads);
  read("blocks", c.blocks);
  read("lstm_cells", c.lstm_cells);
  c.validate();
  return c;
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p.replace_extension();
  p += ".json";
  if (p == checkpoint) p += ".meta.json";
  return p;
}

}  // namespace

ForecasterConfig config_from_json(const std::string& text) { return config_from(json::parse(text)); }

void save_model(const TrainedModel& model, const std::filesystem::path& checkpoint) {
  nn::save_checkpoint(model.parameters, checkpoint);
  const json meta = {{"config", json::parse(config_to_json(model.config))},
                     {"scale", model.scale},
                     {"epoch_losses", model.epoch_losses},
                     {"final_loss", model.final_loss}};
  std::ofstream os(sidecar_path(checkpoint));
  if (!os) throw std::runtime_error("cannot write model sidecar for " + checkpoint.string());
  os << meta.dump(2);
}

TrainedModel load_model(const std::filesystem::path& checkpoint) {
  std::ifstream is(sidecar_path(checkpoint));
  if (!is) throw std::runtime_error("cannot read model sidecar for " + checkpoint.string());
  const json meta = json::parse(is);
  TrainedModel model;
  model.config = config_from(meta.at("config"));
  model.scale = meta.at("scale").get<double>();
  model.epoch_losses = meta.value("epoch_losses", std::vector<double>{});
  model.final_loss = meta.value("final_loss", 0.0);
  model.parameters = nn::load_checkpoint(checkpoint);
  network_for(model.config, model.parameters);  // validates names and shapes
  return model;
}

}  // namespace prb
