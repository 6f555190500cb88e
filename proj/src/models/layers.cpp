#include "models/layers.hpp"

#include <stdexcept>

namespace prb::models {

ParamId Registry::resolve(const std::string& name, std::size_t rows, std::size_t cols) const {
  if (!params_.contains(name)) throw std::runtime_error("checkpoint lacks parameter " + name);
  const ParamId id = params_.id_of(name);
  const Tensor& t = params_[id].value;
  if (t.rows() != rows || t.cols() != cols) {
    throw std::runtime_error("checkpoint parameter " + name + " has shape " + t.shape_str() +
                             ", expected [" + std::to_string(rows) + "x" + std::to_string(cols) +
                             "]");
  }
  return id;
}

nn::DenseIds Registry::dense(const std::string& name, std::size_t in, std::size_t out) {
  if (target_) return target_->add_dense(name, in, out, *rng_);
  return nn::DenseIds{resolve(name + ".weight", in, out), resolve(name + ".bias", 1, out)};
}

ParamId Registry::filled(const std::string& name, std::size_t cols, double value) {
  if (target_) return target_->add(name, Tensor(1, cols, value));
  return resolve(name, 1, cols);
}

Var Binder::operator()(ParamId id) const {
  if (mutable_ && g_.recording()) return g_.parameter(*mutable_, id);
  return g_.constant(params_[id].value);
}

LstmLayer LstmLayer::create(Registry& reg, const std::string& name, std::size_t in,
                            std::size_t hidden) {
  return LstmLayer{reg.dense(name, in + hidden, 4 * hidden), hidden};
}

LstmState LstmLayer::Bound::step(Graph& g, Var x, const LstmState& state) const {
  const Var parts[] = {x, state.h};
  const Var z = g.add_row(g.matmul(g.concat_cols(parts), w), b);
  const Var i = g.sigmoid(g.slice_cols(z, 0, hidden));
  const Var f = g.sigmoid(g.slice_cols(z, hidden, hidden));
  const Var cand = g.tanh(g.slice_cols(z, 2 * hidden, hidden));
  const Var o = g.sigmoid(g.slice_cols(z, 3 * hidden, hidden));
  const Var c = g.add(g.mul(f, state.c), g.mul(i, cand));
  return LstmState{g.mul(o, g.tanh(c)), c};
}

LstmState LstmLayer::zero_state(Graph& g, std::size_t rows) const {
  return LstmState{g.constant(Tensor(rows, hidden)), g.constant(Tensor(rows, hidden))};
}

Tensor feature_row(double value, const CalendarPoint& cal) {
  return Tensor::row({value, cal.hour / 23.0, cal.weekday / 6.0});
}

std::vector<LikelihoodParams> Network::distributions(const Binder&, const WindowPair&) const {
  throw std::logic_error("deterministic model has no predictive distribution");
}

std::vector<LikelihoodParams> Network::rollout(const Binder&, const WindowPair&) const {
  throw std::logic_error("model is not autoregressive");
}

std::vector<LikelihoodParams> studentt_rows(const Tensor& mu, const Tensor& sigma,
                                            const Tensor& nu) {
  std::vector<LikelihoodParams> out;
  out.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) out.push_back(StudentTParams{mu[i], sigma[i], nu[i]});
  return out;
}

std::vector<LikelihoodParams> gaussian_rows(const Tensor& mu, const Tensor& sigma) {
  std::vector<LikelihoodParams> out;
  out.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) out.push_back(GaussianParams{mu[i], sigma[i]});
  return out;
}

namespace {

std::unique_ptr<Network> build(const ForecasterConfig& config, Registry& reg) {
  switch (config.kind) {
    case ModelKind::SFF:
      return make_sff(config, reg);
    case ModelKind::DeepAR:
      return make_deepar(config, reg);
    case ModelKind::Transformer:
      return make_transformer(config, reg);
    case ModelKind::LSTM:
      return make_lstm_baseline(config, reg);
  }
  throw std::logic_error("unknown model kind");
}

}  // namespace

std::unique_ptr<Network> make_network(const ForecasterConfig& config, ParameterSet& params,
                                      Rng& init_rng) {
  Registry reg(params, init_rng);
  return build(config, reg);
}

std::unique_ptr<Network> make_network(const ForecasterConfig& config, const ParameterSet& params) {
  Registry reg(params);
  return build(config, reg);
}

}  // namespace prb::models
