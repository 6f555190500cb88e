#pragma once

// Layer building blocks shared by the four forecasters. Internal header.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prb/forecasters.hpp"
#include "prb/nn/graph.hpp"
#include "prb/nn/parameters.hpp"

namespace prb::models {

using nn::Graph;
using nn::ParameterSet;
using nn::ParamId;
using nn::Tensor;
using nn::Var;

// Creates parameters during initialisation or resolves them by name from an existing set.
class Registry {
 public:
  Registry(ParameterSet& params, Rng& init_rng) : params_(params), target_(&params), rng_(&init_rng) {}
  explicit Registry(const ParameterSet& params) : params_(params) {}

  nn::DenseIds dense(const std::string& name, std::size_t in, std::size_t out);
  ParamId filled(const std::string& name, std::size_t cols, double value);

 private:
  ParamId resolve(const std::string& name, std::size_t rows, std::size_t cols) const;

  const ParameterSet& params_;
  ParameterSet* target_ = nullptr;
  Rng* rng_ = nullptr;
};

// Maps parameters onto graph nodes. Trainable when the graph records and a
// mutable parameter set is available; otherwise parameters enter as constants.
class Binder {
 public:
  Binder(Graph& g, ParameterSet& params) : g_(g), mutable_(&params), params_(params) {}
  Binder(Graph& g, const ParameterSet& params) : g_(g), params_(params) {}

  Graph& graph() const { return g_; }
  Var operator()(ParamId id) const;

 private:
  Graph& g_;
  ParameterSet* mutable_ = nullptr;
  const ParameterSet& params_;
};

struct Dense {
  nn::DenseIds ids;

  struct Bound {
    Var w, b;
    Var operator()(Graph& g, Var x) const { return g.add_row(g.matmul(x, w), b); }
  };
  Bound bind(const Binder& bind) const { return {bind(ids.weight), bind(ids.bias)}; }
};

struct LstmState {
  Var h;
  Var c;
};

// One LSTM layer; gates ordered input, forget, cell, output.
struct LstmLayer {
  nn::DenseIds gates;
  std::size_t hidden = 0;

  static LstmLayer create(Registry& reg, const std::string& name, std::size_t in, std::size_t hidden);

  struct Bound {
    Var w, b;
    std::size_t hidden;
    LstmState step(Graph& g, Var x, const LstmState& state) const;
  };
  Bound bind(const Binder& bind) const { return {bind(gates.weight), bind(gates.bias), hidden}; }
  LstmState zero_state(Graph& g, std::size_t rows) const;
};

// Features fed to calendar-aware models: [value, hour / 23, weekday / 6].
inline constexpr std::size_t kCalendarFeatures = 3;
Tensor feature_row(double value, const CalendarPoint& cal);

// Model-specific training graph, teacher-forced distributions and sampler, all in scaled units.
class Network {
 public:
  virtual ~Network() = default;
  virtual Var loss(const Binder& bind, const WindowPair& window) const = 0;
  virtual std::vector<LikelihoodParams> distributions(const Binder& bind,
                                                      const WindowPair& window) const;
  // Returns num_samples x horizon scaled samples (LSTM: one row).
  virtual Tensor sample(const Binder& bind, std::span<const double> context, CalendarPoint start,
                        Rng& rng) const = 0;
  // Runs the prediction-time code path on one path whose fed-back values are
  // `forced` instead of draws; returns the per-step distributions. Autoregressive
  // models only. Must agree with distributions() on the same window.
  virtual std::vector<LikelihoodParams> rollout(const Binder& bind, const WindowPair& window) const;
};

// Adds freshly initialised parameters to `params`.
std::unique_ptr<Network> make_network(const ForecasterConfig& config, ParameterSet& params,
                                      Rng& init_rng);
// Binds to existing parameters; throws if a name is missing or mis-shaped.
std::unique_ptr<Network> make_network(const ForecasterConfig& config, const ParameterSet& params);

std::unique_ptr<Network> make_sff(const ForecasterConfig& config, Registry& reg);
std::unique_ptr<Network> make_deepar(const ForecasterConfig& config, Registry& reg);
std::unique_ptr<Network> make_transformer(const ForecasterConfig& config, Registry& reg);
std::unique_ptr<Network> make_lstm_baseline(const ForecasterConfig& config, Registry& reg);

// Element-wise distribution parameters from equally shaped tensors.
std::vector<LikelihoodParams> studentt_rows(const Tensor& mu, const Tensor& sigma, const Tensor& nu);
std::vector<LikelihoodParams> gaussian_rows(const Tensor& mu, const Tensor& sigma);

}  // namespace prb::models
