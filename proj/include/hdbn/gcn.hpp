#pragma once

// Graph-convolution branch. Each block is
//   G = ReLU(A * H * W)                       (graph convolution)
//   out = ReLU(depthwise_tconv(G) + G)        (temporal convolution + residual)
// where A is either the degree-normalised static adjacency, a per-sample
// channel-refined adjacency, or a per-frame temporal-dependent adjacency.

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hdbn/error.hpp"
#include "hdbn/nn.hpp"
#include "hdbn/topology.hpp"

namespace hdbn {

enum class AdjacencyMode { Static, ChannelRefined, TemporalDependent };

inline std::string_view to_string(AdjacencyMode m) {
  switch (m) {
    case AdjacencyMode::Static: return "static";
    case AdjacencyMode::ChannelRefined: return "channel_refined";
    case AdjacencyMode::TemporalDependent: return "temporal_dependent";
  }
  return "?";
}

inline AdjacencyMode parse_adjacency_mode(std::string_view s) {
  if (s == "static") return AdjacencyMode::Static;
  if (s == "channel_refined" || s == "ctr") return AdjacencyMode::ChannelRefined;
  if (s == "temporal_dependent" || s == "td") return AdjacencyMode::TemporalDependent;
  throw ConfigError("unknown adjacency mode '" + std::string(s) + "'");
}

// D^-1/2 (A + I) D^-1/2 with A the symmetric 0/1 edge matrix.
inline Mat normalized_adjacency(const Topology& topo) {
  const int v = topo.num_joints;
  Mat a = Mat::Identity(v, v);
  for (auto [i, j] : topo.edges) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  Eigen::VectorXd inv_sqrt_deg(v);
  for (int i = 0; i < v; ++i) inv_sqrt_deg[i] = 1.0 / std::sqrt(a.row(i).sum());
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < v; ++j) a(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
  }
  return a;
}

// Activations laid out as rows (batch, frame, joint), columns channels.
struct FeatureMap {
  int batch = 0;
  int frames = 0;
  int joints = 0;
  Mat values;

  static FeatureMap zeros(int b, int t, int v, int c) {
    return {b, t, v, Mat::Zero(static_cast<Eigen::Index>(b) * t * v, c)};
  }

  int channels() const { return static_cast<int>(values.cols()); }
  Eigen::Index row(int b, int t, int v = 0) const { return (static_cast<Eigen::Index>(b) * frames + t) * joints + v; }
  ConstMatMap slice(int b, int t) const { return {values.data() + row(b, t) * values.cols(), joints, values.cols()}; }
  MatMap slice(int b, int t) { return {values.data() + row(b, t) * values.cols(), joints, values.cols()}; }
  bool same_layout(const FeatureMap& o) const { return batch == o.batch && frames == o.frames && joints == o.joints; }
};

// One V x V matrix shared by everything, one per batch entry, or one per
// (batch entry, frame).
struct AdjacencyStack {
  enum class Granularity { Shared, PerSample, PerFrame };
  Granularity granularity = Granularity::Shared;
  int frames = 1;
  std::vector<Mat> mats;

  const Mat& at(int b, int t) const {
    switch (granularity) {
      case Granularity::Shared: return mats.front();
      case Granularity::PerSample: return mats[b];
      case Granularity::PerFrame: return mats[static_cast<std::size_t>(b) * frames + t];
    }
    return mats.front();
  }

  static AdjacencyStack shared(Mat a) {
    AdjacencyStack s;
    s.mats.push_back(std::move(a));
    return s;
  }
};

namespace detail {

inline void check_square(const Mat& a, int joints) {
  if (a.rows() != joints || a.cols() != joints) {
    throw DimensionError("adjacency is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ", features have " +
                         std::to_string(joints) + " joints");
  }
}

// tanh(phi_i - phi_j) for a column of per-joint scalars.
inline Mat pairwise_tanh(const Eigen::VectorXd& phi) {
  const Eigen::Index v = phi.size();
  Mat d(v, v);
  for (Eigen::Index i = 0; i < v; ++i) {
    for (Eigen::Index j = 0; j < v; ++j) d(i, j) = std::tanh(phi[i] - phi[j]);
  }
  return d;
}

inline void check_refine(const FeatureMap& h, const Mat& a_norm, const Mat& phi) {
  check_square(a_norm, h.joints);
  if (phi.rows() != h.channels() || phi.cols() != 1) {
    throw DimensionError("refinement projection must be " + std::to_string(h.channels()) + "x1");
  }
}

}  // namespace detail

// Per-sample refinement from the temporal mean of each joint's features:
//   A_b = A_norm + tau * tanh(phi(hbar_i) - phi(hbar_j)).
inline AdjacencyStack channel_refined_adjacency(const FeatureMap& h, const Mat& a_norm, const Mat& phi, double tau) {
  detail::check_refine(h, a_norm, phi);
  AdjacencyStack out;
  out.granularity = AdjacencyStack::Granularity::PerSample;
  out.mats.reserve(h.batch);
  for (int b = 0; b < h.batch; ++b) {
    Mat mean = Mat::Zero(h.joints, h.channels());
    for (int t = 0; t < h.frames; ++t) mean += h.slice(b, t);
    mean /= static_cast<double>(h.frames);
    const Eigen::VectorXd proj = mean * phi;
    out.mats.push_back(a_norm + tau * detail::pairwise_tanh(proj));
  }
  return out;
}

// Same refinement computed from each frame's own features.
inline AdjacencyStack temporal_dependent_adjacency(const FeatureMap& h, const Mat& a_norm, const Mat& phi, double tau) {
  detail::check_refine(h, a_norm, phi);
  AdjacencyStack out;
  out.granularity = AdjacencyStack::Granularity::PerFrame;
  out.frames = h.frames;
  out.mats.reserve(static_cast<std::size_t>(h.batch) * h.frames);
  for (int b = 0; b < h.batch; ++b) {
    for (int t = 0; t < h.frames; ++t) {
      const Eigen::VectorXd proj = h.slice(b, t) * phi;
      out.mats.push_back(a_norm + tau * detail::pairwise_tanh(proj));
    }
  }
  return out;
}

namespace detail {

inline FeatureMap project(const FeatureMap& h, const Mat& w) {
  if (w.rows() != h.channels()) {
    throw DimensionError("graph conv weight has " + std::to_string(w.rows()) + " input channels, features have " +
                         std::to_string(h.channels()));
  }
  FeatureMap out{h.batch, h.frames, h.joints, Mat(h.values.rows(), w.cols())};
  out.values.noalias() = h.values * w;
  return out;
}

// ReLU(A_bt * HW_bt) slice by slice, so each slice is activated while hot.
inline FeatureMap propagate_relu(const FeatureMap& hw, const AdjacencyStack& adj) {
  FeatureMap out{hw.batch, hw.frames, hw.joints, Mat(hw.values.rows(), hw.values.cols())};
  for (int b = 0; b < hw.batch; ++b) {
    for (int t = 0; t < hw.frames; ++t) {
      auto dst = out.slice(b, t);
      dst.noalias() = adj.at(b, t) * hw.slice(b, t);
      dst = dst.cwiseMax(0.0);
    }
  }
  return out;
}

// ReLU(depthwise_conv_T(G) + bias + G): depthwise 1-D convolution along
// frames with zero ("same") padding. kernel is C x k, bias 1 x C.
inline FeatureMap temporal_block(const FeatureMap& g, const Mat& kernel, const Mat& bias) {
  const int c_n = g.channels();
  const int k = static_cast<int>(kernel.cols());
  const int r = k / 2;
  const Eigen::Index frame_size = static_cast<Eigen::Index>(g.joints) * c_n;
  const Mat taps = kernel.transpose();  // k x C, one contiguous row per tap
  const double* __restrict beta = bias.data();
  FeatureMap out{g.batch, g.frames, g.joints, Mat(g.values.rows(), c_n)};
  for (int b = 0; b < g.batch; ++b) {
    for (int t = 0; t < g.frames; ++t) {
      double* __restrict dst = out.values.data() + out.row(b, t) * c_n;
      const double* __restrict self = g.values.data() + g.row(b, t) * c_n;
      for (Eigen::Index i = 0; i < frame_size; i += c_n) {
        for (int c = 0; c < c_n; ++c) dst[i + c] = self[i + c] + beta[c];
      }
      for (int tap = 0; tap < k; ++tap) {
        const int src_t = t + tap - r;
        if (src_t < 0 || src_t >= g.frames) continue;
        const double* __restrict src = g.values.data() + g.row(b, src_t) * c_n;
        const double* __restrict w = taps.data() + static_cast<Eigen::Index>(tap) * c_n;
        for (Eigen::Index i = 0; i < frame_size; i += c_n) {
          for (int c = 0; c < c_n; ++c) dst[i + c] += w[c] * src[i + c];
        }
      }
      for (Eigen::Index i = 0; i < frame_size; ++i) dst[i] = dst[i] > 0.0 ? dst[i] : 0.0;
    }
  }
  return out;
}

inline void check_temporal(const FeatureMap& h, const Mat& kernel, const Mat& bias) {
  if (kernel.cols() % 2 == 0) throw ConfigError("temporal kernel size must be odd, got " + std::to_string(kernel.cols()));
  if (kernel.rows() != h.channels() || bias.cols() != h.channels() || bias.rows() != 1) {
    throw DimensionError("temporal conv weights do not match " + std::to_string(h.channels()) + " channels");
  }
}

}  // namespace detail

// ReLU(A * H * W) on every (batch, frame) slice.
inline FeatureMap graph_conv_forward(const FeatureMap& h, const AdjacencyStack& adj, const Mat& w) {
  for (const auto& a : adj.mats) detail::check_square(a, h.joints);
  return detail::propagate_relu(detail::project(h, w), adj);
}

inline FeatureMap graph_conv_forward(const FeatureMap& h, const Mat& a_norm, const Mat& w) {
  return graph_conv_forward(h, AdjacencyStack::shared(a_norm), w);
}

// ReLU(conv_T(H) + bias + H).
inline FeatureMap temporal_conv_forward(const FeatureMap& h, const Mat& kernel, const Mat& bias) {
  detail::check_temporal(h, kernel, bias);
  return detail::temporal_block(h, kernel, bias);
}

struct GcnArch {
  std::vector<int> channels{32, 32, 64, 64};
  int temporal_kernel = 5;
  AdjacencyMode mode = AdjacencyMode::Static;
};

struct GcnLayer {
  Param weight;        // C_in x C_out
  Param refine_proj;   // C_in x 1, used by the dynamic modes
  Param refine_scale;  // 1 x 1 (tau)
  Param tconv_kernel;  // C_out x k
  Param tconv_bias;    // 1 x C_out

  int in_channels() const { return static_cast<int>(weight.value.rows()); }
  int out_channels() const { return static_cast<int>(weight.value.cols()); }
};

// A layer's output is the next layer's input (or GcnCache::last), so it is
// not stored twice. ReLU masks are recovered from the activated values.
struct GcnLayerCache {
  FeatureMap input;
  FeatureMap projected;  // H W
  AdjacencyStack adjacency;
  FeatureMap graph_out;  // ReLU(A H W)
};

struct GcnCache {
  int samples = 0;
  int persons = 0;
  std::vector<GcnLayerCache> layers;
  FeatureMap last;
  Mat pooled;
};

// Signs of every ReLU input in a forward pass; finite differences are only
// meaningful between two parameter settings with the same pattern.
inline std::vector<bool> activation_pattern(const GcnCache& cache) {
  std::vector<bool> out;
  auto append = [&](const FeatureMap& f) {
    for (Eigen::Index i = 0; i < f.values.size(); ++i) out.push_back(f.values.data()[i] > 0.0);
  };
  for (std::size_t li = 0; li < cache.layers.size(); ++li) {
    append(cache.layers[li].graph_out);
    append(li + 1 < cache.layers.size() ? cache.layers[li + 1].input : cache.last);
  }
  return out;
}

class GcnModel {
 public:
  using Cache = GcnCache;

  GcnModel() = default;

  GcnModel(Topology topology, int in_channels, int num_classes, GcnArch arch, std::uint64_t seed)
      : topology_(std::move(topology)), arch_(std::move(arch)), in_channels_(in_channels), num_classes_(num_classes) {
    validate(topology_);
    if (in_channels < 1) throw ConfigError("GCN needs at least one input channel");
    if (num_classes < 2) throw ConfigError("GCN needs at least two classes");
    if (arch_.channels.empty()) throw ConfigError("GCN needs at least one block");
    if (arch_.temporal_kernel < 1 || arch_.temporal_kernel % 2 == 0) {
      throw ConfigError("temporal kernel size must be odd, got " + std::to_string(arch_.temporal_kernel));
    }
    adjacency_ = normalized_adjacency(topology_);

    std::mt19937_64 rng(seed);
    int c_in = in_channels;
    for (int c_out : arch_.channels) {
      if (c_out < 1) throw ConfigError("GCN channel widths must be positive");
      GcnLayer layer;
      layer.weight = Param(c_in, c_out);
      he_uniform(layer.weight.value, c_in, rng);
      layer.refine_proj = Param(c_in, 1);
      he_uniform(layer.refine_proj.value, c_in, rng);
      layer.refine_scale = Param(1, 1);
      layer.tconv_kernel = Param(c_out, arch_.temporal_kernel);
      he_uniform(layer.tconv_kernel.value, arch_.temporal_kernel, rng);
      layer.tconv_bias = Param(1, c_out);
      layers_.push_back(std::move(layer));
      c_in = c_out;
    }
    head_w_ = Param(c_in, num_classes);
    he_uniform(head_w_.value, c_in, rng);
    head_b_ = Param(1, num_classes);
  }

  const Topology& topology() const { return topology_; }
  const GcnArch& arch() const { return arch_; }
  AdjacencyMode mode() const { return arch_.mode; }
  int in_channels() const { return in_channels_; }
  int num_classes() const { return num_classes_; }
  const Mat& adjacency() const { return adjacency_; }
  std::vector<GcnLayer>& layers() { return layers_; }
  const std::vector<GcnLayer>& layers() const { return layers_; }
  Param& head_weight() { return head_w_; }
  Param& head_bias() { return head_b_; }

  // Switching mode keeps every weight, so models can be compared across
  // modes with shared parameters.
  void set_mode(AdjacencyMode mode) { arch_.mode = mode; }

  ParamList parameters() {
    ParamList out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const std::string p = "layer" + std::to_string(i) + ".";
      out.push_back({p + "weight", &layers_[i].weight});
      out.push_back({p + "refine_proj", &layers_[i].refine_proj});
      out.push_back({p + "refine_scale", &layers_[i].refine_scale});
      out.push_back({p + "tconv_kernel", &layers_[i].tconv_kernel});
      out.push_back({p + "tconv_bias", &layers_[i].tconv_bias});
    }
    out.push_back({"head.weight", &head_w_});
    out.push_back({"head.bias", &head_b_});
    return out;
  }

  // Logits [samples, K]. Pass a cache to enable backward().
  Mat forward(const SequenceBatch& batch, GcnCache* cache = nullptr) const {
    if (batch.channels != in_channels_) {
      throw DimensionError("GCN expects " + std::to_string(in_channels_) + " input channels, batch has " +
                           std::to_string(batch.channels));
    }
    if (batch.joints != topology_.num_joints) {
      throw DimensionError("GCN topology has " + std::to_string(topology_.num_joints) + " joints, batch has " +
                           std::to_string(batch.joints));
    }
    FeatureMap h{batch.samples * batch.persons, batch.frames, batch.joints, batch.values};
    if (cache) {
      cache->samples = batch.samples;
      cache->persons = batch.persons;
      cache->layers.clear();
    }
    for (const GcnLayer& layer : layers_) {
      GcnLayerCache lc;
      lc.adjacency = build_adjacency(h, layer);
      lc.projected = detail::project(h, layer.weight.value);
      lc.graph_out = detail::propagate_relu(lc.projected, lc.adjacency);
      FeatureMap next = detail::temporal_block(lc.graph_out, layer.tconv_kernel.value, layer.tconv_bias.value);
      if (cache) {
        lc.input = std::move(h);
        cache->layers.push_back(std::move(lc));
      }
      h = std::move(next);
    }

    // Global average over persons, frames and joints.
    const Eigen::Index rows_per_sample = static_cast<Eigen::Index>(batch.persons) * batch.frames * batch.joints;
    Mat pooled(batch.samples, h.channels());
    for (int n = 0; n < batch.samples; ++n) {
      pooled.row(n) = h.values.middleRows(n * rows_per_sample, rows_per_sample).colwise().sum() /
                      static_cast<double>(rows_per_sample);
    }
    Mat logits = pooled * head_w_.value;
    logits.rowwise() += head_b_.value.row(0);
    if (cache) {
      cache->last = std::move(h);
      cache->pooled = std::move(pooled);
    }
    return logits;
  }

  // Accumulates parameter gradients from dL/dlogits.
  void backward(const GcnCache& cache, const Mat& dlogits) {
    head_w_.grad.noalias() += cache.pooled.transpose() * dlogits;
    head_b_.grad.row(0) += dlogits.colwise().sum();
    const Mat dpooled = dlogits * head_w_.value.transpose();

    const FeatureMap& last = cache.last;
    const Eigen::Index rows_per_sample = static_cast<Eigen::Index>(last.values.rows()) / cache.samples;
    FeatureMap dh{last.batch, last.frames, last.joints, Mat(last.values.rows(), last.values.cols())};
    for (int n = 0; n < cache.samples; ++n) {
      dh.values.middleRows(n * rows_per_sample, rows_per_sample).rowwise() =
          dpooled.row(n) / static_cast<double>(rows_per_sample);
    }

    for (std::size_t li = layers_.size(); li-- > 0;) {
      GcnLayer& layer = layers_[li];
      const GcnLayerCache& lc = cache.layers[li];
      const FeatureMap& out = li + 1 < layers_.size() ? cache.layers[li + 1].input : cache.last;

      // Through the temporal block and the graph-conv ReLU.
      const FeatureMap dg = temporal_block_backward(lc.graph_out, out, dh, layer);

      // graph_pre = A_bt * projected_bt
      FeatureMap dproj{dg.batch, dg.frames, dg.joints, Mat(dg.values.rows(), dg.values.cols())};
      const bool dynamic = arch_.mode != AdjacencyMode::Static;
      std::vector<Mat> dadj;
      if (dynamic) dadj.assign(lc.adjacency.mats.size(), Mat::Zero(dg.joints, dg.joints));
      for (int b = 0; b < dg.batch; ++b) {
        for (int t = 0; t < dg.frames; ++t) {
          dproj.slice(b, t).noalias() = lc.adjacency.at(b, t).transpose() * dg.slice(b, t);
          if (dynamic) {
            const std::size_t idx = arch_.mode == AdjacencyMode::ChannelRefined
                                        ? static_cast<std::size_t>(b)
                                        : static_cast<std::size_t>(b) * dg.frames + t;
            dadj[idx].noalias() += dg.slice(b, t) * lc.projected.slice(b, t).transpose();
          }
        }
      }

      // projected = H W
      layer.weight.grad.noalias() += lc.input.values.transpose() * dproj.values;
      if (li == 0 && !dynamic) break;  // the input batch needs no gradient
      FeatureMap dinput{lc.input.batch, lc.input.frames, lc.input.joints,
                        Mat(lc.input.values.rows(), lc.input.values.cols())};
      dinput.values.noalias() = dproj.values * layer.weight.value.transpose();

      if (dynamic) refine_backward(lc, dadj, layer, dinput);
      dh = std::move(dinput);
    }
  }

 private:
  AdjacencyStack build_adjacency(const FeatureMap& h, const GcnLayer& layer) const {
    const double tau = layer.refine_scale.value(0, 0);
    switch (arch_.mode) {
      case AdjacencyMode::Static: return AdjacencyStack::shared(adjacency_);
      case AdjacencyMode::ChannelRefined:
        return channel_refined_adjacency(h, adjacency_, layer.refine_proj.value, tau);
      case AdjacencyMode::TemporalDependent:
        return temporal_dependent_adjacency(h, adjacency_, layer.refine_proj.value, tau);
    }
    return AdjacencyStack::shared(adjacency_);
  }

  // Given out = ReLU(tconv(G) + bias + G) and G = ReLU(pre), returns dL/dpre
  // and accumulates the kernel and bias gradients.
  static FeatureMap temporal_block_backward(const FeatureMap& g, const FeatureMap& out, const FeatureMap& dout,
                                            GcnLayer& layer) {
    const int c_n = g.channels();
    const int k = static_cast<int>(layer.tconv_kernel.value.cols());
    const int r = k / 2;
    const Eigen::Index frame_size = static_cast<Eigen::Index>(g.joints) * c_n;
    const Mat taps = layer.tconv_kernel.value.transpose();

    // dpre_block = dout * [out > 0]
    Mat dpre(dout.values.rows(), c_n);
    {
      const double* __restrict o = out.values.data();
      const double* __restrict d = dout.values.data();
      double* __restrict dst = dpre.data();
      for (Eigen::Index i = 0; i < dpre.size(); ++i) dst[i] = o[i] > 0.0 ? d[i] : 0.0;
    }
    layer.tconv_bias.grad.row(0) += dpre.colwise().sum();

    Mat dtaps = Mat::Zero(k, c_n);
    FeatureMap dg{g.batch, g.frames, g.joints, dpre};  // residual path
    for (int b = 0; b < g.batch; ++b) {
      for (int t = 0; t < g.frames; ++t) {
        const double* __restrict dy = dpre.data() + g.row(b, t) * c_n;
        for (int tap = 0; tap < k; ++tap) {
          const int src_t = t + tap - r;
          if (src_t < 0 || src_t >= g.frames) continue;
          const double* __restrict src = g.values.data() + g.row(b, src_t) * c_n;
          double* __restrict dsrc = dg.values.data() + g.row(b, src_t) * c_n;
          const double* __restrict w = taps.data() + static_cast<Eigen::Index>(tap) * c_n;
          double* __restrict dw = dtaps.data() + static_cast<Eigen::Index>(tap) * c_n;
          for (Eigen::Index i = 0; i < frame_size; i += c_n) {
            for (int c = 0; c < c_n; ++c) {
              dw[c] += dy[i + c] * src[i + c];
              dsrc[i + c] += w[c] * dy[i + c];
            }
          }
        }
      }
    }
    layer.tconv_kernel.grad += dtaps.transpose();

    // G = ReLU(pre)
    {
      const double* __restrict gv = g.values.data();
      double* __restrict d = dg.values.data();
      for (Eigen::Index i = 0; i < dg.values.size(); ++i) d[i] = gv[i] > 0.0 ? d[i] : 0.0;
    }
    return dg;
  }

  // Gradients through A_dyn = A_norm + tau * tanh(phi_i - phi_j).
  void refine_backward(const GcnLayerCache& lc, const std::vector<Mat>& dadj, GcnLayer& layer,
                       FeatureMap& dinput) const {
    const double tau = layer.refine_scale.value(0, 0);
    const Mat& proj = layer.refine_proj.value;
    const FeatureMap& h = lc.input;
    const bool per_frame = arch_.mode == AdjacencyMode::TemporalDependent;
    for (std::size_t idx = 0; idx < dadj.size(); ++idx) {
      const int b = per_frame ? static_cast<int>(idx / h.frames) : static_cast<int>(idx);
      const int t = per_frame ? static_cast<int>(idx % h.frames) : 0;

      Mat feat;
      if (per_frame) {
        feat = h.slice(b, t);
      } else {
        feat = Mat::Zero(h.joints, h.channels());
        for (int s = 0; s < h.frames; ++s) feat += h.slice(b, s);
        feat /= static_cast<double>(h.frames);
      }
      const Eigen::VectorXd phi = feat * proj;
      const Mat tanh_vals = detail::pairwise_tanh(phi);

      layer.refine_scale.grad(0, 0) += dadj[idx].cwiseProduct(tanh_vals).sum();
      const Mat ddiff = tau * dadj[idx].cwiseProduct((1.0 - tanh_vals.array().square()).matrix());
      const Eigen::VectorXd dphi = ddiff.rowwise().sum() - ddiff.colwise().sum().transpose();
      layer.refine_proj.grad.noalias() += feat.transpose() * dphi;
      const Mat dfeat = dphi * proj.transpose();
      if (per_frame) {
        dinput.slice(b, t) += dfeat;
      } else {
        const Mat share = dfeat / static_cast<double>(h.frames);
        for (int s = 0; s < h.frames; ++s) dinput.slice(b, s) += share;
      }
    }
  }

  Topology topology_;
  GcnArch arch_;
  int in_channels_ = 0;
  int num_classes_ = 0;
  Mat adjacency_;
  std::vector<GcnLayer> layers_;
  Param head_w_;
  Param head_b_;
};

}  // namespace hdbn
