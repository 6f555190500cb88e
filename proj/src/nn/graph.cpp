#include "prb/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prb::nn {

namespace kernels {

double softplus(double x) {
  // log(1 + e^x) without overflow for large x or cancellation for very negative x
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void matmul(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& out,
            bool accumulate) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  if (!accumulate) out.fill(0.0);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  const std::size_t lda = a.cols();
  const std::size_t ldb = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = po + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = trans_a ? pa[p * lda + i] : pa[i * lda + p];
      if (av == 0.0) continue;
      if (!trans_b) {
        const double* brow = pb + p * ldb;
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * pb[j * ldb + p];
      }
    }
  }
}

}  // namespace kernels

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                   b.shape_str());
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

void require_row(const char* op, const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error(op, a, row);
}

}  // namespace

void Graph::clear() {
  nodes_.clear();
  grads_.clear();
}

Var Graph::push(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (std::size_t in : inputs) n.needs_grad = n.needs_grad || nodes_[in].needs_grad;
    if (n.needs_grad) {
      n.inputs = std::move(inputs);
      n.backward = std::move(backward);
    }
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::constant(Tensor value) {
  return push(std::move(value), {}, nullptr);
}

Var Graph::parameter(ParameterSet& params, ParamId id) {
  Parameter& p = params[id];
  Node n;
  n.value = p.value;
  if (record_) {
    n.param = &p;
    n.needs_grad = true;
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.cols() != tb.rows()) shape_error("matmul", ta, tb);
  Tensor out(ta.rows(), tb.cols());
  kernels::matmul(ta, false, tb, false, out, false);
  return push(std::move(out), {a.id, b.id},
              [this, a, b](const Tensor& g, std::span<Tensor* const> gi) {
                if (gi[0]) kernels::matmul(g, false, value(b), true, *gi[0], true);
                if (gi[1]) kernels::matmul(value(a), true, g, false, *gi[1], true);
              });
}

Var Graph::transpose(Var a) {
  const Tensor& ta = value(a);
  Tensor out(ta.cols(), ta.rows());
  for (std::size_t r = 0; r < ta.rows(); ++r)
    for (std::size_t c = 0; c < ta.cols(); ++c) out(c, r) = ta(r, c);
  return push(std::move(out), {a.id}, [](const Tensor& g, std::span<Tensor* const> gi) {
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) (*gi[0])(c, r) += g(r, c);
  });
}

Var Graph::add(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same("add", ta, tb);
  Tensor out = ta;
  out.accumulate(tb);
  return push(std::move(out), {a.id, b.id}, [](const Tensor& g, std::span<Tensor* const> gi) {
    if (gi[0]) gi[0]->accumulate(g);
    if (gi[1]) gi[1]->accumulate(g);
  });
}

Var Graph::sub(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same("sub", ta, tb);
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];
  return push(std::move(out), {a.id, b.id}, [](const Tensor& g, std::span<Tensor* const> gi) {
    if (gi[0]) gi[0]->accumulate(g);
    if (gi[1])
      for (std::size_t i = 0; i < g.size(); ++i) (*gi[1])[i] -= g[i];
  });
}

Var Graph::mul(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same("mul", ta, tb);
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  return push(std::move(out), {a.id, b.id},
              [this, a, b](const Tensor& g, std::span<Tensor* const> gi) {
                const Tensor& va = value(a);
                const Tensor& vb = value(b);
                for (std::size_t i = 0; i < g.size(); ++i) {
                  if (gi[0]) (*gi[0])[i] += g[i] * vb[i];
                  if (gi[1]) (*gi[1])[i] += g[i] * va[i];
                }
              });
}

Var Graph::add_row(Var a, Var row) {
  const Tensor& ta = value(a);
  const Tensor& tr = value(row);
  require_row("add_row", ta, tr);
  Tensor out = ta;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += tr[c];
  return push(std::move(out), {a.id, row.id}, [](const Tensor& g, std::span<Tensor* const> gi) {
    if (gi[0]) gi[0]->accumulate(g);
    if (gi[1])
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) (*gi[1])[c] += g(r, c);
  });
}

Var Graph::mul_row(Var a, Var row) {
  const Tensor& ta = value(a);
  const Tensor& tr = value(row);
  require_row("mul_row", ta, tr);
  Tensor out = ta;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= tr[c];
  return push(std::move(out), {a.id, row.id},
              [this, a, row](const Tensor& g, std::span<Tensor* const> gi) {
                const Tensor& va = value(a);
                const Tensor& vr = value(row);
                for (std::size_t r = 0; r < g.rows(); ++r) {
                  for (std::size_t c = 0; c < g.cols(); ++c) {
                    if (gi[0]) (*gi[0])(r, c) += g(r, c) * vr[c];
                    if (gi[1]) (*gi[1])[c] += g(r, c) * va(r, c);
                  }
                }
              });
}

Var Graph::scale(Var a, double factor) {
  Tensor out = value(a);
  for (double& x : out.data()) x *= factor;
  return push(std::move(out), {a.id}, [factor](const Tensor& g, std::span<Tensor* const> gi) {
    for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += factor * g[i];
  });
}

Var Graph::add_scalar(Var a, double offset) {
  Tensor out = value(a);
  for (double& x : out.data()) x += offset;
  return push(std::move(out), {a.id},
              [](const Tensor& g, std::span<Tensor* const> gi) { gi[0]->accumulate(g); });
}

Var Graph::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = value(parts[0]).rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids;
  for (Var p : parts) {
    const Tensor& t = value(p);
    if (t.rows() != rows) shape_error("concat_cols", value(parts[0]), t);
    cols += t.cols();
    ids.push_back(p.id);
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& t = value(p);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < t.cols(); ++c) out(r, off + c) = t(r, c);
    offsets.push_back(off);
    off += t.cols();
  }
  return push(std::move(out), std::move(ids),
              [offsets](const Tensor& g, std::span<Tensor* const> gi) {
                for (std::size_t k = 0; k < gi.size(); ++k) {
                  if (!gi[k]) continue;
                  Tensor& dst = *gi[k];
                  for (std::size_t r = 0; r < dst.rows(); ++r)
                    for (std::size_t c = 0; c < dst.cols(); ++c) dst(r, c) += g(r, offsets[k] + c);
                }
              });
}

Var Graph::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = value(parts[0]).cols();
  std::size_t rows = 0;
  std::vector<std::size_t> ids;
  for (Var p : parts) {
    const Tensor& t = value(p);
    if (t.cols() != cols) shape_error("concat_rows", value(parts[0]), t);
    rows += t.rows();
    ids.push_back(p.id);
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  std::vector<std::size_t> offsets;
  for (Var p : parts) {
    offsets.push_back(data.size());
    const auto src = value(p).data();
    data.insert(data.end(), src.begin(), src.end());
  }
  return push(Tensor(rows, cols, std::move(data)), std::move(ids),
              [offsets](const Tensor& g, std::span<Tensor* const> gi) {
                for (std::size_t k = 0; k < gi.size(); ++k) {
                  if (!gi[k]) continue;
                  Tensor& dst = *gi[k];
                  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[offsets[k] + i];
                }
              });
}

Var Graph::slice_cols(Var a, std::size_t begin, std::size_t count) {
  const Tensor& ta = value(a);
  if (begin + count > ta.cols() || count == 0) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + ta.shape_str());
  }
  Tensor out(ta.rows(), count);
  for (std::size_t r = 0; r < ta.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = ta(r, begin + c);
  return push(std::move(out), {a.id}, [begin](const Tensor& g, std::span<Tensor* const> gi) {
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) (*gi[0])(r, begin + c) += g(r, c);
  });
}

Var Graph::slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Tensor& ta = value(a);
  if (begin + count > ta.rows() || count == 0) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + ta.shape_str());
  }
  const auto src = ta.data().subspan(begin * ta.cols(), count * ta.cols());
  Tensor out(count, ta.cols(), std::vector<double>(src.begin(), src.end()));
  return push(std::move(out), {a.id}, [begin](const Tensor& g, std::span<Tensor* const> gi) {
    const std::size_t off = begin * g.cols();
    for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[off + i] += g[i];
  });
}

Var Graph::tanh(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = std::tanh(x);
  const std::size_t self = nodes_.size();
  return push(std::move(out), {a.id}, [this, self](const Tensor& g, std::span<Tensor* const> gi) {
    const Tensor& y = nodes_[self].value;
    for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Graph::sigmoid(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = kernels::sigmoid(x);
  const std::size_t self = nodes_.size();
  return push(std::move(out), {a.id}, [this, self](const Tensor& g, std::span<Tensor* const> gi) {
    const Tensor& y = nodes_[self].value;
    for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Graph::relu(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = x > 0.0 ? x : 0.0;
  return push(std::move(out), {a.id}, [this, a](const Tensor& g, std::span<Tensor* const> gi) {
    const Tensor& x = value(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x[i] > 0.0) (*gi[0])[i] += g[i];
  });
}

Var Graph::softplus(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = kernels::softplus(x);
  return push(std::move(out), {a.id}, [this, a](const Tensor& g, std::span<Tensor* const> gi) {
    const Tensor& x = value(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i] * kernels::sigmoid(x[i]);
  });
}

Var Graph::exp(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) x = std::exp(x);
  const std::size_t self = nodes_.size();
  return push(std::move(out), {a.id}, [this, self](const Tensor& g, std::span<Tensor* const> gi) {
    const Tensor& y = nodes_[self].value;
    for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i] * y[i];
  });
}

Var Graph::log(Var a) {
  Tensor out = value(a);
  for (double& x : out.data()) {
    if (!(x > 0.0)) throw std::domain_error("log: non-positive input " + std::to_string(x));
    x = std::log(x);
  }
  return push(std::move(out), {a.id}, [this, a](const Tensor& g, std::span<Tensor* const> gi) {
    const Tensor& x = value(a);
    for (std::size_t i = 0; i < g.size(); ++i) (*gi[0])[i] += g[i] / x[i];
  });
}

Var Graph::softmax_rows(Var a, bool causal) {
  const Tensor& ta = value(a);
  if (causal && ta.rows() > ta.cols()) {
    throw ShapeError("softmax_rows: causal mask needs rows <= cols, got " + ta.shape_str());
  }
  Tensor out(ta.rows(), ta.cols());
  for (std::size_t r = 0; r < ta.rows(); ++r) {
    const std::size_t limit = causal ? r + 1 : ta.cols();
    double mx = ta(r, 0);
    for (std::size_t c = 1; c < limit; ++c) mx = std::max(mx, ta(r, c));
    double total = 0.0;
    for (std::size_t c = 0; c < limit; ++c) {
      out(r, c) = std::exp(ta(r, c) - mx);
      total += out(r, c);
    }
    for (std::size_t c = 0; c < limit; ++c) out(r, c) /= total;
  }
  const std::size_t self = nodes_.size();
  return push(std::move(out), {a.id}, [this, self](const Tensor& g, std::span<Tensor* const> gi) {
    const Tensor& y = nodes_[self].value;
    for (std::size_t r = 0; r < g.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < g.cols(); ++c) (*gi[0])(r, c) += y(r, c) * (g(r, c) - dot);
    }
  });
}

Var Graph::normalize_rows(Var a, double eps) {
  const Tensor& ta = value(a);
  const std::size_t n = ta.cols();
  Tensor out(ta.rows(), n);
  std::vector<double> inv_std(ta.rows());
  for (std::size_t r = 0; r < ta.rows(); ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < n; ++c) mean += ta(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t c = 0; c < n; ++c) var += (ta(r, c) - mean) * (ta(r, c) - mean);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) out(r, c) = (ta(r, c) - mean) * inv_std[r];
  }
  const std::size_t self = nodes_.size();
  return push(std::move(out), {a.id},
              [this, self, inv_std = std::move(inv_std)](const Tensor& g,
                                                         std::span<Tensor* const> gi) {
                const Tensor& y = nodes_[self].value;
                const double n = static_cast<double>(g.cols());
                for (std::size_t r = 0; r < g.rows(); ++r) {
                  double mean_g = 0.0;
                  double mean_gy = 0.0;
                  for (std::size_t c = 0; c < g.cols(); ++c) {
                    mean_g += g(r, c);
                    mean_gy += g(r, c) * y(r, c);
                  }
                  mean_g /= n;
                  mean_gy /= n;
                  for (std::size_t c = 0; c < g.cols(); ++c) {
                    (*gi[0])(r, c) += inv_std[r] * (g(r, c) - mean_g - y(r, c) * mean_gy);
                  }
                }
              });
}

Var Graph::sum(Var a) {
  double total = 0.0;
  for (double x : value(a).data()) total += x;
  return push(Tensor::scalar(total), {a.id}, [](const Tensor& g, std::span<Tensor* const> gi) {
    const double s = g[0];
    for (double& x : gi[0]->data()) x += s;
  });
}

Var Graph::attention(Var q, Var k, Var v, bool causal) {
  const Tensor& tq = value(q);
  const Tensor& tk = value(k);
  if (tq.cols() != tk.cols()) shape_error("attention(q,k)", tq, value(k));
  if (tk.rows() != value(v).rows()) shape_error("attention(k,v)", tk, value(v));
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(tq.cols()));
  Var scores = scale(matmul(q, transpose(k)), inv_sqrt_d);
  return matmul(softmax_rows(scores, causal), v);
}

Var Graph::custom(std::vector<Var> inputs, Tensor value, BackwardFn backward) {
  std::vector<std::size_t> ids;
  ids.reserve(inputs.size());
  for (Var in : inputs) ids.push_back(in.id);
  return push(std::move(value), std::move(ids), std::move(backward));
}

void Graph::backward(Var loss, ParameterSet& params) {
  params.zero_grad();
  const Tensor& lv = value(loss);
  if (lv.size() != 1) throw ShapeError("backward: loss must be scalar, got " + lv.shape_str());
  if (!record_) throw std::logic_error("backward: graph was built without recording");
  grads_.assign(nodes_.size(), Tensor());
  grads_[loss.id] = Tensor::scalar(1.0);
  std::vector<Tensor*> slots;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || grads_[i].size() == 0) continue;
    if (n.param) {
      n.param->grad.accumulate(grads_[i]);
      continue;
    }
    if (!n.backward) continue;
    slots.assign(n.inputs.size(), nullptr);
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      const std::size_t in = n.inputs[k];
      if (!nodes_[in].needs_grad) continue;
      if (grads_[in].size() == 0) {
        grads_[in] = Tensor(nodes_[in].value.rows(), nodes_[in].value.cols());
      }
      slots[k] = &grads_[in];
    }
    n.backward(grads_[i], slots);
  }
}

const Tensor* Graph::grad(Var v) const {
  if (v.id >= grads_.size() || grads_[v.id].size() == 0) return nullptr;
  return &grads_[v.id];
}

}  // namespace prb::nn
