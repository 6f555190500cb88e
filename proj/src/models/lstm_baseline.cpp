#include "models/layers.hpp"

namespace prb::models {

namespace {

// Deterministic baseline: one LSTM layer reads the context, its final hidden
// state maps to all horizon steps at once. Trained with mean squared error.
class LstmBaseline final : public Network {
 public:
  LstmBaseline(const ForecasterConfig& config, Registry& reg)
      : horizon_(config.horizon),
        layer_(LstmLayer::create(reg, "lstm.cell", 1, config.lstm_cells)),
        head_{reg.dense("lstm.head", config.lstm_cells, config.horizon)} {}

  Var loss(const Binder& bind, const WindowPair& window) const override {
    Graph& g = bind.graph();
    const Var diff = g.sub(forward(bind, window.context), g.constant(Tensor::row(window.target)));
    return g.scale(g.sum(g.mul(diff, diff)), 1.0 / static_cast<double>(horizon_));
  }

  Tensor sample(const Binder& bind, std::span<const double> context, CalendarPoint,
                Rng&) const override {
    return bind.graph().value(forward(bind, context));
  }

 private:
  Var forward(const Binder& bind, std::span<const double> context) const {
    Graph& g = bind.graph();
    const LstmLayer::Bound cell = layer_.bind(bind);
    LstmState state = layer_.zero_state(g, 1);
    for (double v : context) state = cell.step(g, g.constant(Tensor::scalar(v)), state);
    return head_.bind(bind)(g, state.h);
  }

  std::size_t horizon_;
  LstmLayer layer_;
  Dense head_;
};

}  // namespace

std::unique_ptr<Network> make_lstm_baseline(const ForecasterConfig& config, Registry& reg) {
  return std::make_unique<LstmBaseline>(config, reg);
}

}  // namespace prb::models
