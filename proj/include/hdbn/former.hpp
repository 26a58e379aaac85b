#pragma once

// Attention branch: joint x temporal-segment tokens, a learned positional
// table, post-norm attention and feedforward blocks, mean-pooled head.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hdbn/error.hpp"
#include "hdbn/nn.hpp"

namespace hdbn {

// Rows are (sample, token), columns features.
struct TokenBatch {
  int batch = 0;
  int tokens = 0;
  Mat values;

  int features() const { return static_cast<int>(values.cols()); }
  auto sample(int b) const { return values.middleRows(static_cast<Eigen::Index>(b) * tokens, tokens); }
  auto sample(int b) { return values.middleRows(static_cast<Eigen::Index>(b) * tokens, tokens); }
};

// First frame of segment s when T frames are split into S segments.
inline int segment_begin(int s, int frames, int segments) {
  return static_cast<int>(static_cast<long long>(s) * frames / segments);
}

// Token (v, s) at index v*S + s holds joint v's channels averaged over the
// frames of segment s and over persons.
inline TokenBatch tokenize(const SequenceBatch& batch, int segments) {
  if (segments < 1) throw ConfigError("segment count must be positive");
  if (segments > batch.frames) {
    throw ConfigError("segment count " + std::to_string(segments) + " exceeds frame count " +
                      std::to_string(batch.frames));
  }
  const int v_n = batch.joints;
  const int c_n = batch.channels;
  TokenBatch out{batch.samples, v_n * segments, Mat::Zero(static_cast<Eigen::Index>(batch.samples) * v_n * segments, c_n)};
  const Eigen::Index rows_per_person = static_cast<Eigen::Index>(batch.frames) * v_n;
  for (int n = 0; n < batch.samples; ++n) {
    for (int s = 0; s < segments; ++s) {
      const int t0 = segment_begin(s, batch.frames, segments);
      const int t1 = segment_begin(s + 1, batch.frames, segments);
      const double count = static_cast<double>(t1 - t0) * batch.persons;
      for (int v = 0; v < v_n; ++v) {
        auto dst = out.values.row(static_cast<Eigen::Index>(n) * out.tokens + v * segments + s);
        for (int m = 0; m < batch.persons; ++m) {
          const Eigen::Index base = (static_cast<Eigen::Index>(n) * batch.persons + m) * rows_per_person;
          for (int t = t0; t < t1; ++t) dst += batch.values.row(base + static_cast<Eigen::Index>(t) * v_n + v);
        }
        dst /= count;
      }
    }
  }
  return out;
}

inline TokenBatch positional_encode(const TokenBatch& tokens, const Mat& table) {
  if (table.rows() != tokens.tokens || table.cols() != tokens.features()) {
    throw DimensionError("positional table is " + std::to_string(table.rows()) + "x" + std::to_string(table.cols()) +
                         ", tokens are " + std::to_string(tokens.tokens) + "x" + std::to_string(tokens.features()));
  }
  TokenBatch out = tokens;
  for (int b = 0; b < out.batch; ++b) out.sample(b) += table;
  return out;
}

struct AttentionParams {
  int heads = 1;
  Param query;   // d x (heads * d_h)
  Param key;     // d x (heads * d_h)
  Param value;   // d x (heads * d_h)
  Param output;  // (heads * d_h) x d
  Param norm_scale;
  Param norm_shift;

  int model_dim() const { return static_cast<int>(query.value.rows()); }
  int head_dim() const { return static_cast<int>(query.value.cols()) / heads; }

  static AttentionParams create(int model_dim, int head_dim, int heads) {
    AttentionParams p;
    p.heads = heads;
    p.query = Param(model_dim, heads * head_dim);
    p.key = Param(model_dim, heads * head_dim);
    p.value = Param(model_dim, heads * head_dim);
    p.output = Param(heads * head_dim, model_dim);
    p.norm_scale = Param(Mat::Ones(1, model_dim));
    p.norm_shift = Param(1, model_dim);
    return p;
  }
};

struct FeedForwardParams {
  Param w1;  // d x d_ff
  Param b1;  // 1 x d_ff
  Param w2;  // d_ff x d
  Param b2;  // 1 x d
  Param norm_scale;
  Param norm_shift;

  static FeedForwardParams create(int model_dim, int ff_dim) {
    FeedForwardParams p;
    p.w1 = Param(model_dim, ff_dim);
    p.b1 = Param(1, ff_dim);
    p.w2 = Param(ff_dim, model_dim);
    p.b2 = Param(1, model_dim);
    p.norm_scale = Param(Mat::Ones(1, model_dim));
    p.norm_shift = Param(1, model_dim);
    return p;
  }
};

struct AttentionCache {
  TokenBatch input;
  Mat query, key, value;
  std::vector<Mat> weights;  // [batch * heads], each tokens x tokens
  Mat attended;              // concatenated heads, before W_O
  RowNormCache norm;
};

struct FeedForwardCache {
  TokenBatch input;
  Mat hidden_pre;
  Mat hidden;
  RowNormCache norm;
};

namespace detail {

inline void check_attention(const TokenBatch& x, const AttentionParams& p) {
  const int d = x.features();
  if (p.heads < 1) throw ConfigError("attention needs at least one head");
  if (p.query.value.rows() != d || p.key.value.rows() != d || p.value.value.rows() != d ||
      p.output.value.cols() != d) {
    throw DimensionError("attention weights do not match model width " + std::to_string(d));
  }
  if (p.key.value.cols() != p.query.value.cols() || p.value.value.cols() != p.query.value.cols() ||
      p.output.value.rows() != p.query.value.cols() || p.query.value.cols() % p.heads != 0) {
    throw DimensionError("attention projections do not chain");
  }
}

}  // namespace detail

// Softmax(Q K^T / sqrt(d_h)) per sample and head, index b * heads + h.
inline std::vector<Mat> attention_weights(const TokenBatch& x, const AttentionParams& p) {
  detail::check_attention(x, p);
  const Mat q = x.values * p.query.value;
  const Mat k = x.values * p.key.value;
  const int dh = p.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Mat> out;
  for (int b = 0; b < x.batch; ++b) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * x.tokens;
    for (int h = 0; h < p.heads; ++h) {
      const Mat scores = (q.block(r0, h * dh, x.tokens, dh) * k.block(r0, h * dh, x.tokens, dh).transpose()) * scale;
      out.push_back(softmax_rows(scores));
    }
  }
  return out;
}

// F = Norm(X + Attention(X W_Q, X W_K, X W_V) W_O)
inline TokenBatch attention_block_forward(const TokenBatch& x, const AttentionParams& p,
                                          AttentionCache* cache = nullptr) {
  detail::check_attention(x, p);
  const int dh = p.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat q = x.values * p.query.value;
  Mat k = x.values * p.key.value;
  Mat v = x.values * p.value.value;
  Mat attended(x.values.rows(), q.cols());
  std::vector<Mat> weights;
  weights.reserve(static_cast<std::size_t>(x.batch) * p.heads);
  for (int b = 0; b < x.batch; ++b) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * x.tokens;
    for (int h = 0; h < p.heads; ++h) {
      Mat w = softmax_rows((q.block(r0, h * dh, x.tokens, dh) * k.block(r0, h * dh, x.tokens, dh).transpose()) * scale);
      attended.block(r0, h * dh, x.tokens, dh).noalias() = w * v.block(r0, h * dh, x.tokens, dh);
      weights.push_back(std::move(w));
    }
  }
  Mat residual = x.values;
  residual.noalias() += attended * p.output.value;
  TokenBatch out{x.batch, x.tokens, Mat()};
  if (cache) {
    out.values = row_norm_forward(residual, p.norm_scale.value, p.norm_shift.value, &cache->norm);
    cache->input = x;
    cache->query = std::move(q);
    cache->key = std::move(k);
    cache->value = std::move(v);
    cache->weights = std::move(weights);
    cache->attended = std::move(attended);
  } else {
    out.values = row_norm_forward(residual, p.norm_scale.value, p.norm_shift.value);
  }
  return out;
}

// Returns dL/dX; accumulates parameter gradients into p.
inline Mat attention_block_backward(const AttentionCache& cache, AttentionParams& p, const Mat& dout) {
  const TokenBatch& x = cache.input;
  const int dh = p.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Mat dresidual = row_norm_backward(cache.norm, p.norm_scale.value, dout, p.norm_scale.grad, p.norm_shift.grad);
  p.output.grad.noalias() += cache.attended.transpose() * dresidual;
  const Mat dattended = dresidual * p.output.value.transpose();

  Mat dq = Mat::Zero(cache.query.rows(), cache.query.cols());
  Mat dk = Mat::Zero(cache.key.rows(), cache.key.cols());
  Mat dv = Mat::Zero(cache.value.rows(), cache.value.cols());
  for (int b = 0; b < x.batch; ++b) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(b) * x.tokens;
    for (int h = 0; h < p.heads; ++h) {
      const Mat& w = cache.weights[static_cast<std::size_t>(b) * p.heads + h];
      const auto d_att = dattended.block(r0, h * dh, x.tokens, dh);
      dv.block(r0, h * dh, x.tokens, dh).noalias() = w.transpose() * d_att;
      const Mat dw = d_att * cache.value.block(r0, h * dh, x.tokens, dh).transpose();
      const Mat dscores = softmax_rows_backward(w, dw) * scale;
      dq.block(r0, h * dh, x.tokens, dh).noalias() = dscores * cache.key.block(r0, h * dh, x.tokens, dh);
      dk.block(r0, h * dh, x.tokens, dh).noalias() = dscores.transpose() * cache.query.block(r0, h * dh, x.tokens, dh);
    }
  }
  p.query.grad.noalias() += x.values.transpose() * dq;
  p.key.grad.noalias() += x.values.transpose() * dk;
  p.value.grad.noalias() += x.values.transpose() * dv;

  Mat dx = dresidual;
  dx.noalias() += dq * p.query.value.transpose();
  dx.noalias() += dk * p.key.value.transpose();
  dx.noalias() += dv * p.value.value.transpose();
  return dx;
}

// Norm(F + W2 ReLU(W1 F + b1) + b2), per token.
inline TokenBatch feedforward_block(const TokenBatch& f, const FeedForwardParams& p,
                                    FeedForwardCache* cache = nullptr) {
  if (p.w1.value.rows() != f.features() || p.w2.value.cols() != f.features() ||
      p.w1.value.cols() != p.w2.value.rows()) {
    throw DimensionError("feedforward weights do not match model width " + std::to_string(f.features()));
  }
  Mat hidden_pre = f.values * p.w1.value;
  hidden_pre.rowwise() += p.b1.value.row(0);
  Mat hidden = hidden_pre.cwiseMax(0.0);
  Mat residual = f.values;
  residual.noalias() += hidden * p.w2.value;
  residual.rowwise() += p.b2.value.row(0);
  TokenBatch out{f.batch, f.tokens, Mat()};
  if (cache) {
    out.values = row_norm_forward(residual, p.norm_scale.value, p.norm_shift.value, &cache->norm);
    cache->input = f;
    cache->hidden_pre = std::move(hidden_pre);
    cache->hidden = std::move(hidden);
  } else {
    out.values = row_norm_forward(residual, p.norm_scale.value, p.norm_shift.value);
  }
  return out;
}

inline Mat feedforward_backward(const FeedForwardCache& cache, FeedForwardParams& p, const Mat& dout) {
  const Mat dresidual = row_norm_backward(cache.norm, p.norm_scale.value, dout, p.norm_scale.grad, p.norm_shift.grad);
  p.w2.grad.noalias() += cache.hidden.transpose() * dresidual;
  p.b2.grad.row(0) += dresidual.colwise().sum();
  const Mat dhidden =
      (dresidual * p.w2.value.transpose()).cwiseProduct((cache.hidden_pre.array() > 0.0).cast<double>().matrix());
  p.w1.grad.noalias() += cache.input.values.transpose() * dhidden;
  p.b1.grad.row(0) += dhidden.colwise().sum();
  Mat dx = dresidual;
  dx.noalias() += dhidden * p.w1.value.transpose();
  return dx;
}

struct FormerArch {
  int model_dim = 64;
  int segments = 4;
  int blocks = 2;
  int ff_dim = 128;
  int heads = 1;
};

struct FormerBlock {
  AttentionParams attention;
  FeedForwardParams feedforward;
};

struct FormerCache {
  TokenBatch tokens;
  std::vector<AttentionCache> attention;
  std::vector<FeedForwardCache> feedforward;
  Mat pooled;
};

inline std::vector<bool> activation_pattern(const FormerCache& cache) {
  std::vector<bool> out;
  for (const auto& ff : cache.feedforward) {
    for (Eigen::Index i = 0; i < ff.hidden_pre.size(); ++i) out.push_back(ff.hidden_pre.data()[i] > 0.0);
  }
  return out;
}

class FormerModel {
 public:
  using Cache = FormerCache;

  FormerModel() = default;

  FormerModel(int joints, int in_channels, int num_classes, FormerArch arch, std::uint64_t seed)
      : arch_(arch), joints_(joints), in_channels_(in_channels), num_classes_(num_classes) {
    if (joints < 1 || in_channels < 1) throw ConfigError("former needs positive joint and channel counts");
    if (num_classes < 2) throw ConfigError("former needs at least two classes");
    if (arch_.model_dim < 1 || arch_.ff_dim < 1 || arch_.blocks < 0 || arch_.segments < 1) {
      throw ConfigError("former dimensions must be positive");
    }
    if (arch_.heads < 1 || arch_.model_dim % arch_.heads != 0) {
      throw ConfigError("model width " + std::to_string(arch_.model_dim) + " is not divisible by " +
                        std::to_string(arch_.heads) + " heads");
    }
    const int d = arch_.model_dim;
    const int dh = d / arch_.heads;
    std::mt19937_64 rng(seed);
    embed_ = Param(in_channels, d);
    he_uniform(embed_.value, in_channels, rng);
    pos_table_ = Param(joints * arch_.segments, d);
    for (int i = 0; i < arch_.blocks; ++i) {
      FormerBlock blk{AttentionParams::create(d, dh, arch_.heads), FeedForwardParams::create(d, arch_.ff_dim)};
      he_uniform(blk.attention.query.value, d, rng);
      he_uniform(blk.attention.key.value, d, rng);
      he_uniform(blk.attention.value.value, d, rng);
      he_uniform(blk.attention.output.value, arch_.heads * dh, rng);
      he_uniform(blk.feedforward.w1.value, d, rng);
      he_uniform(blk.feedforward.w2.value, arch_.ff_dim, rng);
      blocks_.push_back(std::move(blk));
    }
    head_w_ = Param(d, num_classes);
    he_uniform(head_w_.value, d, rng);
    head_b_ = Param(1, num_classes);
  }

  const FormerArch& arch() const { return arch_; }
  int joints() const { return joints_; }
  int in_channels() const { return in_channels_; }
  int num_classes() const { return num_classes_; }
  int num_tokens() const { return joints_ * arch_.segments; }
  Param& embedding() { return embed_; }
  Param& positional_table() { return pos_table_; }
  std::vector<FormerBlock>& blocks() { return blocks_; }
  Param& head_weight() { return head_w_; }
  Param& head_bias() { return head_b_; }

  ParamList parameters() {
    ParamList out{{"embed.weight", &embed_}, {"pos_table", &pos_table_}};
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const std::string p = "block" + std::to_string(i) + ".";
      auto& a = blocks_[i].attention;
      auto& f = blocks_[i].feedforward;
      out.push_back({p + "attn.query", &a.query});
      out.push_back({p + "attn.key", &a.key});
      out.push_back({p + "attn.value", &a.value});
      out.push_back({p + "attn.output", &a.output});
      out.push_back({p + "attn.norm_scale", &a.norm_scale});
      out.push_back({p + "attn.norm_shift", &a.norm_shift});
      out.push_back({p + "ff.w1", &f.w1});
      out.push_back({p + "ff.b1", &f.b1});
      out.push_back({p + "ff.w2", &f.w2});
      out.push_back({p + "ff.b2", &f.b2});
      out.push_back({p + "ff.norm_scale", &f.norm_scale});
      out.push_back({p + "ff.norm_shift", &f.norm_shift});
    }
    out.push_back({"head.weight", &head_w_});
    out.push_back({"head.bias", &head_b_});
    return out;
  }

  Mat forward(const SequenceBatch& batch, FormerCache* cache = nullptr) const {
    if (batch.channels != in_channels_ || batch.joints != joints_) {
      throw DimensionError("former expects " + std::to_string(joints_) + " joints x " + std::to_string(in_channels_) +
                           " channels, batch has " + std::to_string(batch.joints) + " x " +
                           std::to_string(batch.channels));
    }
    TokenBatch tokens = tokenize(batch, arch_.segments);
    TokenBatch x{tokens.batch, tokens.tokens, tokens.values * embed_.value};
    x = positional_encode(x, pos_table_.value);
    if (cache) {
      cache->tokens = std::move(tokens);
      cache->attention.assign(blocks_.size(), {});
      cache->feedforward.assign(blocks_.size(), {});
    }
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      x = attention_block_forward(x, blocks_[i].attention, cache ? &cache->attention[i] : nullptr);
      x = feedforward_block(x, blocks_[i].feedforward, cache ? &cache->feedforward[i] : nullptr);
    }
    Mat pooled(x.batch, x.features());
    for (int b = 0; b < x.batch; ++b) pooled.row(b) = x.sample(b).colwise().mean();
    Mat logits = pooled * head_w_.value;
    logits.rowwise() += head_b_.value.row(0);
    if (cache) cache->pooled = std::move(pooled);
    return logits;
  }

  void backward(const FormerCache& cache, const Mat& dlogits) {
    head_w_.grad.noalias() += cache.pooled.transpose() * dlogits;
    head_b_.grad.row(0) += dlogits.colwise().sum();
    const Mat dpooled = dlogits * head_w_.value.transpose();
    const int tokens = cache.tokens.tokens;
    Mat dx(static_cast<Eigen::Index>(cache.tokens.batch) * tokens, arch_.model_dim);
    for (int b = 0; b < cache.tokens.batch; ++b) {
      dx.middleRows(static_cast<Eigen::Index>(b) * tokens, tokens).rowwise() = dpooled.row(b) / static_cast<double>(tokens);
    }
    for (std::size_t i = blocks_.size(); i-- > 0;) {
      dx = feedforward_backward(cache.feedforward[i], blocks_[i].feedforward, dx);
      dx = attention_block_backward(cache.attention[i], blocks_[i].attention, dx);
    }
    for (int b = 0; b < cache.tokens.batch; ++b) {
      pos_table_.grad += dx.middleRows(static_cast<Eigen::Index>(b) * tokens, tokens);
    }
    embed_.grad.noalias() += cache.tokens.values.transpose() * dx;
  }

 private:
  FormerArch arch_;
  int joints_ = 0;
  int in_channels_ = 0;
  int num_classes_ = 0;
  Param embed_;
  Param pos_table_;
  std::vector<FormerBlock> blocks_;
  Param head_w_;
  Param head_b_;
};

}  // namespace hdbn
