#include "prb/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace prb::nn {

void Adam::step(ParameterSet& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.rows(), p.value.cols());
      v_.emplace_back(p.value.rows(), p.value.cols());
    }
  }
  if (m_.size() != params.size()) {
    throw std::invalid_argument("adam: parameter count changed between steps");
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double correct1 = 1.0 - std::pow(config_.beta1, t);
  const double correct2 = 1.0 - std::pow(config_.beta2, t);
  std::size_t k = 0;
  for (auto& p : params) {
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    ++k;
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols() ||
        m.size() != p.value.size()) {
      throw std::invalid_argument("adam: shape mismatch for parameter " + p.name);
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / correct1;
      const double v_hat = v[i] / correct2;
      p.value[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

}  // namespace prb::nn
