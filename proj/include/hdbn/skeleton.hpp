#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hdbn/error.hpp"
#include "hdbn/topology.hpp"

namespace hdbn {

// The six input streams. K2/K2M are the two-hop bone and its motion.
enum class Modality { J, B, JM, BM, K2, K2M };

inline constexpr Modality kAllModalities[] = {Modality::J,  Modality::B,  Modality::JM,
                                              Modality::BM, Modality::K2, Modality::K2M};

inline std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::J: return "J";
    case Modality::B: return "B";
    case Modality::JM: return "JM";
    case Modality::BM: return "BM";
    case Modality::K2: return "K2";
    case Modality::K2M: return "K2M";
  }
  return "?";
}

// Accepts the short tags (J, BM, ...) case-insensitively and the long
// names used on the command line (joint, bone, joint-motion, ...).
inline Modality parse_modality(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "j" || s == "joint") return Modality::J;
  if (s == "b" || s == "bone") return Modality::B;
  if (s == "jm" || s == "joint-motion" || s == "joint_motion") return Modality::JM;
  if (s == "bm" || s == "bone-motion" || s == "bone_motion") return Modality::BM;
  if (s == "k2") return Modality::K2;
  if (s == "k2m" || s == "k2-motion" || s == "k2_motion") return Modality::K2M;
  throw ConfigError("unknown modality '" + std::string(text) + "'");
}

// Dense [persons M][frames T][joints V][channels C] pose array.
struct SkeletonSequence {
  int persons = 0;
  int frames = 0;
  int joints = 0;
  int channels = 0;
  std::vector<float> data;
  Modality modality = Modality::J;
  std::string sample_id;
  std::optional<int> label;

  static SkeletonSequence zeros(int m, int t, int v, int c, Modality modality = Modality::J) {
    if (m < 0 || t < 0 || v < 0 || c < 0) throw ArgumentError("negative sequence extent");
    SkeletonSequence s;
    s.persons = m;
    s.frames = t;
    s.joints = v;
    s.channels = c;
    s.modality = modality;
    s.data.assign(static_cast<std::size_t>(m) * t * v * c, 0.0f);
    return s;
  }

  std::size_t index(int m, int t, int v, int c) const {
    return ((static_cast<std::size_t>(m) * frames + t) * joints + v) * channels + c;
  }
  float& at(int m, int t, int v, int c) { return data[index(m, t, v, c)]; }
  float at(int m, int t, int v, int c) const { return data[index(m, t, v, c)]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const SkeletonSequence& o) const {
    return persons == o.persons && frames == o.frames && joints == o.joints && channels == o.channels;
  }
};

// Throws on empty extents, a payload/shape mismatch or non-finite values.
inline void validate(const SkeletonSequence& seq) {
  if (seq.persons < 1 || seq.frames < 1 || seq.joints < 1) {
    throw ArgumentError("sequence '" + seq.sample_id + "' has an empty extent");
  }
  if (seq.channels != 2 && seq.channels != 3) {
    throw DimensionError("sequence '" + seq.sample_id + "' has " + std::to_string(seq.channels) +
                         " channels, expected 2 or 3");
  }
  if (seq.data.size() != static_cast<std::size_t>(seq.persons) * seq.frames * seq.joints * seq.channels) {
    throw DimensionError("sequence '" + seq.sample_id + "' payload does not match its shape");
  }
  for (float x : seq.data) {
    if (!std::isfinite(x)) throw ArgumentError("sequence '" + seq.sample_id + "' has a non-finite value");
  }
}

enum class Split { Train, Val, Test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw ConfigError("unknown split '" + std::string(s) + "'");
}

struct Dataset {
  std::vector<SkeletonSequence> sequences;
  int num_classes = 0;
  Split split = Split::Train;

  std::size_t size() const { return sequences.size(); }
  bool empty() const { return sequences.empty(); }
};

inline void validate(const Dataset& ds) {
  if (ds.num_classes < 1) throw ConfigError("dataset needs at least one class");
  std::set<std::string> ids;
  for (const auto& s : ds.sequences) {
    validate(s);
    if (!s.label || *s.label < 0 || *s.label >= ds.num_classes) {
      throw ArgumentError("sample '" + s.sample_id + "' has a missing or out-of-range label");
    }
    if (s.joints != ds.sequences.front().joints || s.channels != ds.sequences.front().channels) {
      throw DimensionError("sample '" + s.sample_id + "' disagrees with the dataset joint/channel layout");
    }
    if (!ids.insert(s.sample_id).second) throw ArgumentError("duplicate sample id '" + s.sample_id + "'");
  }
}

namespace detail {

inline void require_modality(const SkeletonSequence& seq, Modality want, std::string_view op) {
  if (seq.modality != want) {
    throw ModalityError(std::string(op) + " expects modality " + std::string(to_string(want)) + ", got " +
                        std::string(to_string(seq.modality)));
  }
}

inline void require_joints(const SkeletonSequence& seq, const Topology& topo) {
  if (seq.joints != topo.num_joints) {
    throw DimensionError("sequence has " + std::to_string(seq.joints) + " joints, topology '" + topo.name +
                         "' has " + std::to_string(topo.num_joints));
  }
}

// out[m,t,j,:] = seq[m,t,j,:] - seq[m,t,ancestor[j],:]
inline SkeletonSequence subtract_ancestor(const SkeletonSequence& seq, const std::vector<int>& ancestor,
                                          Modality out_modality) {
  SkeletonSequence out = seq;
  out.modality = out_modality;
  const int c_n = seq.channels;
  for (int m = 0; m < seq.persons; ++m) {
    for (int t = 0; t < seq.frames; ++t) {
      const float* frame = &seq.data[seq.index(m, t, 0, 0)];
      float* dst = &out.data[out.index(m, t, 0, 0)];
      for (int j = 0; j < seq.joints; ++j) {
        const int a = ancestor[j];
        for (int c = 0; c < c_n; ++c) dst[j * c_n + c] = frame[j * c_n + c] - frame[a * c_n + c];
      }
    }
  }
  return out;
}

}  // namespace detail

// Bone stream: each joint minus its parent; the root bone is zero.
inline SkeletonSequence derive_bone(const SkeletonSequence& seq, const Topology& topo) {
  detail::require_modality(seq, Modality::J, "derive_bone");
  detail::require_joints(seq, topo);
  return detail::subtract_ancestor(seq, topo.parent, Modality::B);
}

// Frame difference v[t+1] - v[t]; the last frame is zero so T is preserved.
// J -> JM, B -> BM, K2 -> K2M.
inline SkeletonSequence derive_joint_motion(const SkeletonSequence& seq) {
  Modality out_modality;
  switch (seq.modality) {
    case Modality::J: out_modality = Modality::JM; break;
    case Modality::B: out_modality = Modality::BM; break;
    case Modality::K2: out_modality = Modality::K2M; break;
    default:
      throw ModalityError("derive_joint_motion expects J, B or K2, got " + std::string(to_string(seq.modality)));
  }
  if (seq.frames == 0) throw ArgumentError("derive_joint_motion on an empty sequence");

  SkeletonSequence out = seq;
  out.modality = out_modality;
  const std::size_t frame_size = static_cast<std::size_t>(seq.joints) * seq.channels;
  for (int m = 0; m < seq.persons; ++m) {
    for (int t = 0; t + 1 < seq.frames; ++t) {
      const float* cur = &seq.data[seq.index(m, t, 0, 0)];
      const float* next = cur + frame_size;
      float* dst = &out.data[out.index(m, t, 0, 0)];
      for (std::size_t i = 0; i < frame_size; ++i) dst[i] = next[i] - cur[i];
    }
    float* last = &out.data[out.index(m, seq.frames - 1, 0, 0)];
    std::fill(last, last + frame_size, 0.0f);
  }
  return out;
}

inline SkeletonSequence derive_bone_motion(const SkeletonSequence& seq, const Topology& topo) {
  return derive_joint_motion(derive_bone(seq, topo));
}

// Two-hop bone: joint minus its grandparent (parent2). Root and its
// children difference against the root.
inline SkeletonSequence derive_k2(const SkeletonSequence& seq, const Topology& topo) {
  detail::require_modality(seq, Modality::J, "derive_k2");
  detail::require_joints(seq, topo);
  return detail::subtract_ancestor(seq, topo.parent2, Modality::K2);
}

inline SkeletonSequence derive_k2_motion(const SkeletonSequence& seq, const Topology& topo) {
  return derive_joint_motion(derive_k2(seq, topo));
}

// Builds any of the six streams from a joint sequence.
inline SkeletonSequence derive_modality(const SkeletonSequence& joints, const Topology& topo, Modality target) {
  detail::require_modality(joints, Modality::J, "derive_modality");
  switch (target) {
    case Modality::J: detail::require_joints(joints, topo); return joints;
    case Modality::B: return derive_bone(joints, topo);
    case Modality::JM: return derive_joint_motion(joints);
    case Modality::BM: return derive_bone_motion(joints, topo);
    case Modality::K2: return derive_k2(joints, topo);
    case Modality::K2M: return derive_k2_motion(joints, topo);
  }
  throw ModalityError("unhandled modality");
}

// Linear interpolation on the frame axis. T == target returns a copy;
// a single-frame sequence is repeated.
inline SkeletonSequence resample_sequence(const SkeletonSequence& seq, int target_frames) {
  if (target_frames <= 0) throw ArgumentError("resample target must be positive");
  if (seq.frames < 1) throw ArgumentError("resample of an empty sequence");
  if (target_frames == seq.frames) return seq;

  SkeletonSequence out = SkeletonSequence::zeros(seq.persons, target_frames, seq.joints, seq.channels, seq.modality);
  out.sample_id = seq.sample_id;
  out.label = seq.label;
  const std::size_t frame_size = static_cast<std::size_t>(seq.joints) * seq.channels;
  for (int i = 0; i < target_frames; ++i) {
    int lo = 0;
    int hi = 0;
    double w = 0.0;
    if (seq.frames > 1 && target_frames > 1) {
      const double pos = static_cast<double>(i) * (seq.frames - 1) / (target_frames - 1);
      lo = std::min(static_cast<int>(std::floor(pos)), seq.frames - 1);
      hi = std::min(lo + 1, seq.frames - 1);
      w = pos - lo;
    }
    for (int m = 0; m < seq.persons; ++m) {
      const float* a = &seq.data[seq.index(m, lo, 0, 0)];
      const float* b = &seq.data[seq.index(m, hi, 0, 0)];
      float* dst = &out.data[out.index(m, i, 0, 0)];
      for (std::size_t k = 0; k < frame_size; ++k) {
        dst[k] = static_cast<float>((1.0 - w) * a[k] + w * b[k]);
      }
    }
  }
  return out;
}

// Moves `root_joint` to the origin in every frame, then scales by the
// sample's max absolute coordinate (skipped when that is zero).
inline SkeletonSequence center_normalize(const SkeletonSequence& seq, int root_joint = 0) {
  detail::require_modality(seq, Modality::J, "center_normalize");
  if (root_joint < 0 || root_joint >= seq.joints) throw ArgumentError("root joint out of range");
  if (seq.channels > 3) throw DimensionError("center_normalize supports at most 3 channels");

  SkeletonSequence out = seq;
  const int c_n = seq.channels;
  for (int m = 0; m < seq.persons; ++m) {
    for (int t = 0; t < seq.frames; ++t) {
      float* frame = &out.data[out.index(m, t, 0, 0)];
      float root[3] = {0, 0, 0};
      for (int c = 0; c < c_n; ++c) root[c] = frame[root_joint * c_n + c];
      for (int j = 0; j < seq.joints; ++j) {
        for (int c = 0; c < c_n; ++c) frame[j * c_n + c] -= root[c];
      }
    }
  }
  float max_abs = 0.0f;
  for (float x : out.data) max_abs = std::max(max_abs, std::abs(x));
  if (max_abs > 0.0f) {
    for (float& x : out.data) x /= max_abs;
  }
  return out;
}

}  // namespace hdbn
