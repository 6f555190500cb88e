#include "models/layers.hpp"

namespace prb::models {

namespace {

// Autoregressive stacked LSTM with a Gaussian head. Step s consumes the value at
// position s - 1 together with the calendar features of position s; the outputs
// at positions context_len .. context_len + horizon - 1 parametrise the targets.
class DeepAr final : public Network {
 public:
  DeepAr(const ForecasterConfig& config, Registry& reg)
      : context_len_(config.context_len),
        horizon_(config.horizon),
        num_samples_(config.num_samples) {
    std::size_t in = kCalendarFeatures;
    for (std::size_t l = 0; l < config.rnn_layers; ++l) {
      layers_.push_back(LstmLayer::create(reg, "deepar.lstm" + std::to_string(l), in, config.rnn_cells));
      in = config.rnn_cells;
    }
    head_ = Dense{reg.dense("deepar.head", config.rnn_cells, 2)};
  }

  Var loss(const Binder& bind, const WindowPair& window) const override {
    Graph& g = bind.graph();
    const Params p = teacher_forced(bind, window);
    return gaussian_nll(g, g.constant(Tensor(horizon_, 1, window.target)), p.mu, p.sigma);
  }

  std::vector<LikelihoodParams> distributions(const Binder& bind,
                                              const WindowPair& window) const override {
    Graph& g = bind.graph();
    const Params p = teacher_forced(bind, window);
    return gaussian_rows(g.value(p.mu), g.value(p.sigma));
  }

  Tensor sample(const Binder& bind, std::span<const double> context, CalendarPoint start,
                Rng& rng) const override {
    return run(bind, context, start, num_samples_, &rng, {}, nullptr);
  }

  std::vector<LikelihoodParams> rollout(const Binder& bind,
                                        const WindowPair& window) const override {
    std::vector<LikelihoodParams> dists;
    run(bind, window.context, window.context_start, 1, nullptr, window.target, &dists);
    return dists;
  }

 private:
  struct Params {
    Var mu, sigma;  // horizon x 1
  };

  std::vector<LstmLayer::Bound> bind_layers(const Binder& bind) const {
    std::vector<LstmLayer::Bound> cells;
    for (const auto& layer : layers_) cells.push_back(layer.bind(bind));
    return cells;
  }

  static Var step(Graph& g, const std::vector<LstmLayer::Bound>& cells,
                  std::vector<LstmState>& state, Var x) {
    for (std::size_t l = 0; l < cells.size(); ++l) {
      state[l] = cells[l].step(g, x, state[l]);
      x = state[l].h;
    }
    return x;
  }

  Params teacher_forced(const Binder& bind, const WindowPair& window) const {
    Graph& g = bind.graph();
    const auto cells = bind_layers(bind);
    std::vector<LstmState> state;
    for (const auto& layer : layers_) state.push_back(layer.zero_state(g, 1));
    auto value_at = [&](std::size_t pos) {
      return pos < context_len_ ? window.context[pos] : window.target[pos - context_len_];
    };
    std::vector<Var> outputs;
    outputs.reserve(horizon_);
    for (std::size_t s = 1; s < context_len_ + horizon_; ++s) {
      const Var x = g.constant(feature_row(value_at(s - 1), window.context_start.advanced(s)));
      const Var h = step(g, cells, state, x);
      if (s >= context_len_) outputs.push_back(h);
    }
    const Var raw = head_.bind(bind)(g, g.concat_rows(outputs));
    return Params{g.slice_cols(raw, 0, 1), g.softplus(g.slice_cols(raw, 1, 1))};
  }

  // Ancestral sampling over `rows` paths; with `forced` set the fed-back values are
  // taken from it instead of drawn, and row 0's distributions are recorded.
  Tensor run(const Binder& bind, std::span<const double> context, CalendarPoint start,
             std::size_t rows, Rng* rng, std::span<const double> forced,
             std::vector<LikelihoodParams>* dists) const {
    Graph& g = bind.graph();
    const auto cells = bind_layers(bind);
    const Dense::Bound head = head_.bind(bind);

    // Warm up on a single row, then fan the state out to one row per sample path.
    std::vector<LstmState> state;
    for (const auto& layer : layers_) state.push_back(layer.zero_state(g, 1));
    for (std::size_t s = 1; s < context_len_; ++s) {
      step(g, cells, state, g.constant(feature_row(context[s - 1], start.advanced(s))));
    }
    if (rows > 1) {
      std::vector<Var> fan(rows);
      for (auto& st : state) {
        std::fill(fan.begin(), fan.end(), st.h);
        st.h = g.concat_rows(fan);
        std::fill(fan.begin(), fan.end(), st.c);
        st.c = g.concat_rows(fan);
      }
    }

    Tensor out(rows, horizon_);
    std::vector<double> prev(rows, context[context_len_ - 1]);
    for (std::size_t t = 0; t < horizon_; ++t) {
      const CalendarPoint cal = start.advanced(context_len_ + t);
      Tensor x(rows, kCalendarFeatures);
      for (std::size_t s = 0; s < rows; ++s) {
        x(s, 0) = prev[s];
        x(s, 1) = cal.hour / 23.0;
        x(s, 2) = cal.weekday / 6.0;
      }
      const Var h = step(g, cells, state, g.constant(std::move(x)));
      const Tensor& raw = g.value(head(g, h));
      for (std::size_t s = 0; s < rows; ++s) {
        const GaussianParams p = project_gaussian(raw(s, 0), raw(s, 1));
        if (dists && s == 0) dists->push_back(p);
        const double y = forced.empty() ? draw(p, *rng) : forced[t];
        out(s, t) = y;
        prev[s] = y;
      }
    }
    return out;
  }

  std::size_t context_len_;
  std::size_t horizon_;
  std::size_t num_samples_;
  std::vector<LstmLayer> layers_;
  Dense head_;
};

}  // namespace

std::unique_ptr<Network> make_deepar(const ForecasterConfig& config, Registry& reg) {
  return std::make_unique<DeepAr>(config, reg);
}

}  // namespace prb::models
