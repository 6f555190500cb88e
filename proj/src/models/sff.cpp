#include "models/layers.hpp"

namespace prb::models {

namespace {

// Feed-forward network: context window -> ReLU hidden layers -> three heads of
// `horizon` outputs each, giving Student-t (mu, sigma, nu) for every step.
class SimpleFeedForward final : public Network {
 public:
  SimpleFeedForward(const ForecasterConfig& config, Registry& reg) : horizon_(config.horizon) {
    std::size_t width = config.context_len;
    for (std::size_t i = 0; i < config.sff_hidden.size(); ++i) {
      hidden_.push_back(Dense{reg.dense("sff.hidden" + std::to_string(i), width, config.sff_hidden[i])});
      width = config.sff_hidden[i];
    }
    mu_ = Dense{reg.dense("sff.mu", width, horizon_)};
    sigma_ = Dense{reg.dense("sff.sigma", width, horizon_)};
    nu_ = Dense{reg.dense("sff.nu", width, horizon_)};
    num_samples_ = config.num_samples;
  }

  Var loss(const Binder& bind, const WindowPair& window) const override {
    Graph& g = bind.graph();
    const Heads h = forward(bind, window.context);
    return studentt_nll(g, g.constant(Tensor::row(window.target)), h.mu, h.sigma, h.nu);
  }

  std::vector<LikelihoodParams> distributions(const Binder& bind,
                                              const WindowPair& window) const override {
    Graph& g = bind.graph();
    const Heads h = forward(bind, window.context);
    return studentt_rows(g.value(h.mu), g.value(h.sigma), g.value(h.nu));
  }

  Tensor sample(const Binder& bind, std::span<const double> context, CalendarPoint,
                Rng& rng) const override {
    Graph& g = bind.graph();
    const Heads h = forward(bind, context);
    const auto dists = studentt_rows(g.value(h.mu), g.value(h.sigma), g.value(h.nu));
    Tensor out(num_samples_, horizon_);
    for (std::size_t t = 0; t < horizon_; ++t) {
      const auto column = prb::sample(dists[t], rng, num_samples_);
      for (std::size_t s = 0; s < num_samples_; ++s) out(s, t) = column[s];
    }
    return out;
  }

 private:
  struct Heads {
    Var mu, sigma, nu;
  };

  Heads forward(const Binder& bind, std::span<const double> context) const {
    Graph& g = bind.graph();
    Var x = g.constant(Tensor::row(context));
    for (const auto& layer : hidden_) x = g.relu(layer.bind(bind)(g, x));
    return Heads{mu_.bind(bind)(g, x), g.softplus(sigma_.bind(bind)(g, x)),
                 g.add_scalar(g.softplus(nu_.bind(bind)(g, x)), kStudentTNuFloor)};
  }

  std::size_t horizon_;
  std::size_t num_samples_ = 0;
  std::vector<Dense> hidden_;
  Dense mu_, sigma_, nu_;
};

}  // namespace

std::unique_ptr<Network> make_sff(const ForecasterConfig& config, Registry& reg) {
  return std::make_unique<SimpleFeedForward>(config, reg);
}

}  // namespace prb::models
