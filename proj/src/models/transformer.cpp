#include <cmath>

#include "models/layers.hpp"

namespace prb::models {

namespace {

struct LayerNorm {
  ParamId gain, bias;

  static LayerNorm create(Registry& reg, const std::string& name, std::size_t dim) {
    return LayerNorm{reg.filled(name + ".gain", dim, 1.0), reg.filled(name + ".bias", dim, 0.0)};
  }
  struct Bound {
    Var gain, bias;
    Var operator()(Graph& g, Var x) const {
      return g.add_row(g.mul_row(g.normalize_rows(x), gain), bias);
    }
  };
  Bound bind(const Binder& b) const { return {b(gain), b(bias)}; }
};

struct Attention {
  Dense q, k, v, o;
  std::size_t heads = 1;

  static Attention create(Registry& reg, const std::string& name, std::size_t dim,
                          std::size_t heads) {
    return Attention{Dense{reg.dense(name + ".q", dim, dim)}, Dense{reg.dense(name + ".k", dim, dim)},
                     Dense{reg.dense(name + ".v", dim, dim)}, Dense{reg.dense(name + ".o", dim, dim)},
                     heads};
  }

  struct Bound {
    Dense::Bound q, k, v, o;
    std::size_t heads;

    // Multi-head attention of queries x_q over keys/values already projected.
    Var attend(Graph& g, Var queries, Var keys, Var values, bool causal) const {
      const std::size_t dh = g.value(queries).cols() / heads;
      std::vector<Var> outs;
      outs.reserve(heads);
      for (std::size_t h = 0; h < heads; ++h) {
        outs.push_back(g.attention(g.slice_cols(queries, h * dh, dh), g.slice_cols(keys, h * dh, dh),
                                   g.slice_cols(values, h * dh, dh), causal));
      }
      return o(g, g.concat_cols(outs));
    }
    Var operator()(Graph& g, Var xq, Var xkv, bool causal) const {
      return attend(g, q(g, xq), k(g, xkv), v(g, xkv), causal);
    }
  };
  Bound bind(const Binder& b) const { return {q.bind(b), k.bind(b), v.bind(b), o.bind(b), heads}; }
};

struct FeedForward {
  Dense in, out;
  struct Bound {
    Dense::Bound in, out;
    Var operator()(Graph& g, Var x) const { return out(g, g.relu(in(g, x))); }
  };
  Bound bind(const Binder& b) const { return {in.bind(b), out.bind(b)}; }
};

struct EncoderBlock {
  Attention self;
  LayerNorm norm1;
  FeedForward ff;
  LayerNorm norm2;
};

struct DecoderBlock {
  Attention self;
  LayerNorm norm1;
  Attention cross;
  LayerNorm norm2;
  FeedForward ff;
  LayerNorm norm3;
};

// Sinusoidal position encoding row for absolute position `pos`.
Tensor position_row(std::size_t pos, std::size_t dim) {
  Tensor row(1, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
    row[i] = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
  }
  return row;
}

Tensor position_block(std::size_t first, std::size_t count, std::size_t dim) {
  Tensor out(count, dim);
  for (std::size_t r = 0; r < count; ++r) {
    const Tensor row = position_row(first + r, dim);
    for (std::size_t c = 0; c < dim; ++c) out(r, c) = row[c];
  }
  return out;
}

// Post-norm encoder-decoder transformer with a Student-t head. The encoder reads
// the context; decoder row t sees the value at position context_len + t - 1 and
// the calendar of position context_len + t, with causal self-attention and
// attention over the encoder output.
class TransformerNet final : public Network {
 public:
  TransformerNet(const ForecasterConfig& config, Registry& reg)
      : context_len_(config.context_len),
        horizon_(config.horizon),
        num_samples_(config.num_samples),
        dim_(config.model_dim),
        heads_(config.heads) {
    const std::size_t ff_dim = config.model_dim * config.ff_scale;
    enc_embed_ = Dense{reg.dense("transformer.enc_embed", kCalendarFeatures, dim_)};
    dec_embed_ = Dense{reg.dense("transformer.dec_embed", kCalendarFeatures, dim_)};
    for (std::size_t b = 0; b < config.blocks; ++b) {
      const std::string p = "transformer.enc" + std::to_string(b);
      encoder_.push_back(EncoderBlock{
          Attention::create(reg, p + ".self", dim_, heads_), LayerNorm::create(reg, p + ".norm1", dim_),
          FeedForward{Dense{reg.dense(p + ".ff_in", dim_, ff_dim)}, Dense{reg.dense(p + ".ff_out", ff_dim, dim_)}},
          LayerNorm::create(reg, p + ".norm2", dim_)});
    }
    for (std::size_t b = 0; b < config.blocks; ++b) {
      const std::string p = "transformer.dec" + std::to_string(b);
      decoder_.push_back(DecoderBlock{
          Attention::create(reg, p + ".self", dim_, heads_), LayerNorm::create(reg, p + ".norm1", dim_),
          Attention::create(reg, p + ".cross", dim_, heads_), LayerNorm::create(reg, p + ".norm2", dim_),
          FeedForward{Dense{reg.dense(p + ".ff_in", dim_, ff_dim)}, Dense{reg.dense(p + ".ff_out", ff_dim, dim_)}},
          LayerNorm::create(reg, p + ".norm3", dim_)});
    }
    head_ = Dense{reg.dense("transformer.head", dim_, 3)};
  }

  Var loss(const Binder& bind, const WindowPair& window) const override {
    Graph& g = bind.graph();
    const Heads h = teacher_forced(bind, window);
    return studentt_nll(g, g.constant(Tensor(horizon_, 1, window.target)), h.mu, h.sigma, h.nu);
  }

  std::vector<LikelihoodParams> distributions(const Binder& bind,
                                              const WindowPair& window) const override {
    Graph& g = bind.graph();
    const Heads h = teacher_forced(bind, window);
    return studentt_rows(g.value(h.mu), g.value(h.sigma), g.value(h.nu));
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
  struct Heads {
    Var mu, sigma, nu;
  };

  // Embeddings are scaled by sqrt(model_dim) before the position encoding is added.
  double embed_scale() const { return std::sqrt(static_cast<double>(dim_)); }

  Heads project(Graph& g, Var raw) const {
    return Heads{g.slice_cols(raw, 0, 1), g.softplus(g.slice_cols(raw, 1, 1)),
                 g.add_scalar(g.softplus(g.slice_cols(raw, 2, 1)), kStudentTNuFloor)};
  }

  Var encode(const Binder& bind, std::span<const double> context, CalendarPoint start) const {
    Graph& g = bind.graph();
    Tensor feats(context_len_, kCalendarFeatures);
    for (std::size_t p = 0; p < context_len_; ++p) {
      const Tensor row = feature_row(context[p], start.advanced(p));
      for (std::size_t c = 0; c < kCalendarFeatures; ++c) feats(p, c) = row[c];
    }
    Var x = g.add(g.scale(enc_embed_.bind(bind)(g, g.constant(std::move(feats))), embed_scale()),
                  g.constant(position_block(0, context_len_, dim_)));
    for (const auto& blk : encoder_) {
      x = blk.norm1.bind(bind)(g, g.add(x, blk.self.bind(bind)(g, x, x, false)));
      x = blk.norm2.bind(bind)(g, g.add(x, blk.ff.bind(bind)(g, x)));
    }
    return x;
  }

  Heads teacher_forced(const Binder& bind, const WindowPair& window) const {
    Graph& g = bind.graph();
    const Var memory = encode(bind, window.context, window.context_start);
    Tensor feats(horizon_, kCalendarFeatures);
    for (std::size_t t = 0; t < horizon_; ++t) {
      const double prev = t == 0 ? window.context[context_len_ - 1] : window.target[t - 1];
      const Tensor row = feature_row(prev, window.context_start.advanced(context_len_ + t));
      for (std::size_t c = 0; c < kCalendarFeatures; ++c) feats(t, c) = row[c];
    }
    Var x = g.add(g.scale(dec_embed_.bind(bind)(g, g.constant(std::move(feats))), embed_scale()),
                  g.constant(position_block(context_len_, horizon_, dim_)));
    for (const auto& blk : decoder_) {
      x = blk.norm1.bind(bind)(g, g.add(x, blk.self.bind(bind)(g, x, x, true)));
      x = blk.norm2.bind(bind)(g, g.add(x, blk.cross.bind(bind)(g, x, memory, false)));
      x = blk.norm3.bind(bind)(g, g.add(x, blk.ff.bind(bind)(g, x)));
    }
    return project(g, head_.bind(bind)(g, x));
  }

  // Causal self-attention of the newest decoder position over cached keys/values,
  // independently for each of the `rows` sample paths.
  Tensor cached_self_attention(const Tensor& queries, const std::vector<Tensor>& keys,
                               const std::vector<Tensor>& values) const {
    const std::size_t rows = queries.rows();
    const std::size_t dh = dim_ / heads_;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    const std::size_t steps = keys.size();
    Tensor out(rows, dim_);
    std::vector<double> w(steps);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t h = 0; h < heads_; ++h) {
        const std::size_t off = h * dh;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < steps; ++j) {
          double dot = 0.0;
          for (std::size_t c = 0; c < dh; ++c) dot += queries(r, off + c) * keys[j](r, off + c);
          w[j] = dot * inv_sqrt;
          mx = std::max(mx, w[j]);
        }
        double total = 0.0;
        for (std::size_t j = 0; j < steps; ++j) {
          w[j] = std::exp(w[j] - mx);
          total += w[j];
        }
        for (std::size_t j = 0; j < steps; ++j) {
          const double a = w[j] / total;
          for (std::size_t c = 0; c < dh; ++c) out(r, off + c) += a * values[j](r, off + c);
        }
      }
    }
    return out;
  }

  // Incremental decoding with per-block key/value caches, batched over sample paths.
  Tensor run(const Binder& bind, std::span<const double> context, CalendarPoint start,
             std::size_t rows, Rng* rng, std::span<const double> forced,
             std::vector<LikelihoodParams>* dists) const {
    Graph& g = bind.graph();
    const Var memory = encode(bind, context, start);

    struct BlockState {
      Attention::Bound self, cross;
      LayerNorm::Bound norm1, norm2, norm3;
      FeedForward::Bound ff;
      Var mem_keys, mem_values;
      std::vector<Tensor> keys, values;
    };
    std::vector<BlockState> blocks;
    for (const auto& blk : decoder_) {
      BlockState st{blk.self.bind(bind), blk.cross.bind(bind), blk.norm1.bind(bind),
                    blk.norm2.bind(bind), blk.norm3.bind(bind), blk.ff.bind(bind), {}, {}, {}, {}};
      st.mem_keys = st.cross.k(g, memory);
      st.mem_values = st.cross.v(g, memory);
      blocks.push_back(std::move(st));
    }
    const Dense::Bound embed = dec_embed_.bind(bind);
    const Dense::Bound head = head_.bind(bind);

    Tensor out(rows, horizon_);
    std::vector<double> prev(rows, context[context_len_ - 1]);
    for (std::size_t t = 0; t < horizon_; ++t) {
      const CalendarPoint cal = start.advanced(context_len_ + t);
      Tensor feats(rows, kCalendarFeatures);
      for (std::size_t s = 0; s < rows; ++s) {
        feats(s, 0) = prev[s];
        feats(s, 1) = cal.hour / 23.0;
        feats(s, 2) = cal.weekday / 6.0;
      }
      Var x = g.add_row(g.scale(embed(g, g.constant(std::move(feats))), embed_scale()),
                        g.constant(position_row(context_len_ + t, dim_)));
      for (auto& st : blocks) {
        const Var q = st.self.q(g, x);
        st.keys.push_back(g.value(st.self.k(g, x)));
        st.values.push_back(g.value(st.self.v(g, x)));
        const Var attn = st.self.o(g, g.constant(cached_self_attention(g.value(q), st.keys, st.values)));
        x = st.norm1(g, g.add(x, attn));
        x = st.norm2(g, g.add(x, st.cross.attend(g, st.cross.q(g, x), st.mem_keys, st.mem_values, false)));
        x = st.norm3(g, g.add(x, st.ff(g, x)));
      }
      const Tensor& raw = g.value(head(g, x));
      for (std::size_t s = 0; s < rows; ++s) {
        const StudentTParams p = project_studentt(raw(s, 0), raw(s, 1), raw(s, 2), kStudentTNuFloor);
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
  std::size_t dim_;
  std::size_t heads_;
  Dense enc_embed_, dec_embed_;
  std::vector<EncoderBlock> encoder_;
  std::vector<DecoderBlock> decoder_;
  Dense head_;
};

}  // namespace

std::unique_ptr<Network> make_transformer(const ForecasterConfig& config, Registry& reg) {
  return std::make_unique<TransformerNet>(config, reg);
}

}  // namespace prb::models
