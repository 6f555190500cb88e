#pragma once

// Independent oracles shared by the unit tests and the acceptance run.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "prb/forecasters.hpp"
#include "prb/likelihoods.hpp"

namespace prb::testing {

// Composite Simpson rule on [lo, hi] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return acc * h / 3.0;
}

// Total mass of the Student-t density. Substituting y = mu + sigma * tan(theta)
// maps the real line onto (-pi/2, pi/2), so heavy tails are integrated, not truncated.
inline double studentt_mass(const StudentTParams& p, int panels = 200000) {
  const auto f = [&](double theta) {
    const double c = std::cos(theta);
    if (c <= 0.0) return 0.0;
    return std::exp(studentt_logpdf(p.mu + p.sigma * std::tan(theta), p)) * p.sigma / (c * c);
  };
  const double half_pi = std::numbers::pi / 2;
  return simpson(f, -half_pi, half_pi, panels);
}

inline double gaussian_mass(const GaussianParams& p, int panels = 200000) {
  return simpson([&](double y) { return std::exp(gaussian_logpdf(y, p)); }, p.mu - 50 * p.sigma,
                 p.mu + 50 * p.sigma, panels);
}

inline nn::Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  nn::Tensor t(r, c);
  for (double& x : t.data()) x = rng.uniform(lo, hi);
  return t;
}

struct NamedCheck {
  std::string name;
  GradCheckResult result;
};

// Gradient check of every graph primitive against central differences.
inline std::vector<NamedCheck> primitive_gradchecks() {
  using namespace prb::nn;

  Rng rng(7);
  ParameterSet params;
  ParamId a = params.add("a", random_tensor(3, 4, rng));
  ParamId b = params.add("b", random_tensor(4, 3, rng));
  ParamId c = params.add("c", random_tensor(3, 4, rng));
  ParamId row = params.add("row", random_tensor(1, 4, rng));
  ParamId pos = params.add("pos", random_tensor(3, 4, rng, 0.5, 2.0));
  // Fixed weights turn every op output into a scalar with a non-trivial gradient.
  const Tensor w34 = random_tensor(3, 4, rng);
  const Tensor w33 = random_tensor(3, 3, rng);

  auto weighted = [](Graph& g, Var x, const Tensor& w) { return g.sum(g.mul(x, g.constant(w))); };

  struct Case {
    const char* name;
    LossBuilder build;
  };
  const std::vector<Case> cases = {
      {"matmul", [&](Graph& g, ParameterSet& p) {
         return weighted(g, g.matmul(g.parameter(p, a), g.parameter(p, b)), w33);
       }},
      {"transpose", [&](Graph& g, ParameterSet& p) {
         return weighted(g, g.transpose(g.parameter(p, b)), w34);
       }},
      {"add_sub_mul", [&](Graph& g, ParameterSet& p) {
         Var x = g.parameter(p, a);
         Var y = g.parameter(p, c);
         return weighted(g, g.mul(g.add(x, y), g.sub(x, y)), w34);
       }},
      {"add_row_mul_row", [&](Graph& g, ParameterSet& p) {
         Var r = g.parameter(p, row);
         return weighted(g, g.mul_row(g.add_row(g.parameter(p, a), r), r), w34);
       }},
      {"scale_add_scalar", [&](Graph& g, ParameterSet& p) {
         return weighted(g, g.add_scalar(g.scale(g.parameter(p, a), -1.7), 0.3), w34);
       }},
      {"concat_slice", [&](Graph& g, ParameterSet& p) {
         Var x = g.parameter(p, a);
         Var y = g.parameter(p, c);
         std::vector<Var> cols = {x, y};
         Var cc = g.concat_cols(cols);
         std::vector<Var> rows = {g.slice_cols(cc, 2, 4), g.slice_rows(y, 1, 2)};
         Var cr = g.concat_rows(rows);
         return weighted(g, g.slice_rows(cr, 1, 3), w34);
       }},
      {"tanh_sigmoid_relu", [&](Graph& g, ParameterSet& p) {
         Var x = g.parameter(p, a);
         return weighted(g, g.add(g.mul(g.tanh(x), g.sigmoid(x)), g.relu(x)), w34);
       }},
      {"softplus_exp_log", [&](Graph& g, ParameterSet& p) {
         Var x = g.parameter(p, a);
         return weighted(g, g.add(g.softplus(x), g.mul(g.exp(x), g.log(g.parameter(p, pos)))), w34);
       }},
      {"softmax", [&](Graph& g, ParameterSet& p) {
         return weighted(g, g.softmax_rows(g.parameter(p, a)), w34);
       }},
      {"softmax_causal", [&](Graph& g, ParameterSet& p) {
         return weighted(g, g.softmax_rows(g.parameter(p, a), true), w34);
       }},
      {"normalize_rows", [&](Graph& g, ParameterSet& p) {
         return weighted(g, g.normalize_rows(g.parameter(p, a)), w34);
       }},
      {"attention", [&](Graph& g, ParameterSet& p) {
         Var q = g.parameter(p, a);
         Var k = g.parameter(p, c);
         Var v = g.transpose(g.parameter(p, b));
         return weighted(g, g.attention(q, k, v, false), w34);
       }},
      {"attention_causal", [&](Graph& g, ParameterSet& p) {
         Var q = g.parameter(p, a);
         Var k = g.parameter(p, c);
         Var v = g.transpose(g.parameter(p, b));
         return weighted(g, g.attention(q, k, v, true), w34);
       }},
      {"studentt_nll", [&](Graph& g, ParameterSet& p) {
         Var y = g.constant(w34);
         Var x = g.parameter(p, a);
         Var z = g.parameter(p, c);
         return studentt_nll(g, y, x, g.softplus(z), g.add_scalar(g.softplus(g.parameter(p, pos)), 2.0));
       }},
      {"gaussian_nll", [&](Graph& g, ParameterSet& p) {
         return gaussian_nll(g, g.constant(w34), g.parameter(p, a), g.softplus(g.parameter(p, c)));
       }},
  };
  std::vector<NamedCheck> out;
  for (const auto& tc : cases) out.push_back({tc.name, gradcheck(tc.build, params)});
  return out;
}

// Smallest instances of each model: context 4, horizon 2, widths <= 8.
inline ForecasterConfig tiny_model(ModelKind kind) {
  ForecasterConfig c = ForecasterConfig::defaults(kind, 11);
  c.context_len = 4;
  c.horizon = 2;
  c.num_samples = 5;
  c.sff_hidden = {6, 5};
  c.rnn_layers = 2;
  c.rnn_cells = 4;
  c.model_dim = 8;
  c.ff_scale = 1;
  c.heads = 2;
  c.blocks = 1;
  c.lstm_cells = 5;
  return c;
}

inline WindowPair tiny_window() { return WindowPair{{0.9, 1.2, 0.7, 1.1}, {1.3, 0.8}, 4, CalendarPoint{21, 4}}; }

// End-to-end training-loss gradient check per model. Attention key biases have
// an exactly zero gradient (softmax ignores a shared score offset), so the
// relative error uses an absolute floor.
inline std::vector<NamedCheck> model_gradchecks() {
  std::vector<NamedCheck> out;
  for (ModelKind k : kAllModelKinds) {
    const ForecasterConfig c = tiny_model(k);
    auto params = init_parameters(c);
    const WindowPair w = tiny_window();
    out.push_back({to_string(k), gradcheck([&](nn::Graph& g, nn::ParameterSet& p) { return training_loss(c, g, p, w); },
                                           params, 1e-4, 1e-6)});
  }
  return out;
}

// Literal per-timestep reference implementations of the metrics.
namespace oracle {

inline double mse(const std::vector<double>& y, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - p[i]) * (y[i] - p[i]);
  return s / y.size();
}
inline double mae(const std::vector<double>& y, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - p[i]);
  return s / y.size();
}
inline double mape(const std::vector<double>& y, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - p[i]) / y[i];
  return 100 * s / y.size();
}
inline double nd(const std::vector<double>& y, const std::vector<double>& p) {
  double a = 0, b = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    a += std::fabs(y[i] - p[i]);
    b += std::fabs(y[i]);
  }
  return a / b;
}
inline double qloss(const std::vector<double>& y, const std::vector<double>& p, double q) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > p[i]) s += q * (y[i] - p[i]);
    else s += (1 - q) * (p[i] - y[i]);
  }
  return 2 * s / y.size();
}
inline double cover(const std::vector<double>& y, const std::vector<double>& p) {
  int c = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] <= p[i]) ++c;
  return double(c) / y.size();
}
inline std::pair<double, double> prov(const std::vector<double>& y, const std::vector<int>& a) {
  int over = 0, under = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (a[i] >= y[i]) ++over;
    else ++under;
  }
  return {100.0 * over / y.size(), 100.0 * under / y.size()};
}

}  // namespace oracle

}  // namespace prb::testing
