#pragma once

// Synthetic stand-in for a skeleton action dataset. Each class is a
// sinusoidal limb-motion archetype on the given topology: a class-specific
// frequency plus per-joint amplitudes and phases. Samples jitter the
// archetype's phase and amplitude and add Gaussian noise.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hdbn/error.hpp"
#include "hdbn/nn.hpp"
#include "hdbn/skeleton.hpp"
#include "hdbn/topology.hpp"

namespace hdbn {

struct SynthConfig {
  int num_classes = 4;
  int samples_per_class = 50;
  int frames = 32;
  int persons = 2;  // only person 0 moves, the rest are zero padding
  double noise_std = 0.05;
  std::uint64_t seed = 0;
};

inline void validate(const SynthConfig& c) {
  if (c.num_classes < 2) throw ConfigError("synthetic data needs at least two classes");
  if (c.samples_per_class < 1) throw ConfigError("samples_per_class must be positive");
  if (c.frames < 1) throw ConfigError("frames must be positive");
  if (c.persons < 1) throw ConfigError("persons must be positive");
  if (!(c.noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
}

namespace detail {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Rest pose: each joint sits at a fixed offset from its parent.
inline std::vector<std::array<double, 2>> rest_pose(const Topology& topo) {
  const int v = topo.num_joints;
  std::vector<std::array<double, 2>> pos(v, {0.0, 0.0});
  std::vector<bool> done(v, false);
  for (int j = 0; j < v; ++j) {
    std::vector<int> chain;
    for (int cur = j; !done[cur]; cur = topo.parent[cur]) {
      chain.push_back(cur);
      if (topo.parent[cur] == cur) break;
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const int cur = *it;
      const int p = topo.parent[cur];
      if (p == cur) {
        pos[cur] = {0.0, 0.0};
      } else {
        const double angle = kTwoPi * (cur + 0.5) / v;
        pos[cur] = {pos[p][0] + 0.3 * std::cos(angle), pos[p][1] + 0.3 * std::sin(angle)};
      }
      done[cur] = true;
    }
  }
  return pos;
}

struct Archetype {
  double frequency = 1.0;
  std::vector<double> amp_x, amp_y, phase_x, phase_y;
};

inline std::vector<Archetype> archetypes(const SynthConfig& c, int joints) {
  // Independent of the split so train and validation share class shapes.
  std::mt19937_64 rng(c.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<Archetype> out(c.num_classes);
  for (int k = 0; k < c.num_classes; ++k) {
    Archetype& a = out[k];
    a.frequency = 1.0 + (k % 4);
    for (int j = 0; j < joints; ++j) {
      a.amp_x.push_back(uniform(rng, 0.05, 0.25));
      a.amp_y.push_back(uniform(rng, 0.05, 0.25));
      a.phase_x.push_back(uniform(rng, 0.0, kTwoPi));
      a.phase_y.push_back(uniform(rng, 0.0, kTwoPi));
    }
  }
  return out;
}

inline std::uint64_t split_salt(Split s) {
  switch (s) {
    case Split::Train: return 0x1000;
    case Split::Val: return 0x2000;
    case Split::Test: return 0x3000;
  }
  return 0;
}

}  // namespace detail

// Balanced, deterministic in (config, split). Ids are "<split>_<index>".
inline Dataset generate_synthetic(const SynthConfig& config, const Topology& topo, Split split = Split::Train) {
  validate(config);
  validate(topo);
  const int v = topo.num_joints;
  const auto rest = detail::rest_pose(topo);
  const auto classes = detail::archetypes(config, v);
  std::mt19937_64 rng(config.seed * 0x100000001B3ull + detail::split_salt(split));

  Dataset ds;
  ds.num_classes = config.num_classes;
  ds.split = split;
  int index = 0;
  for (int i = 0; i < config.samples_per_class; ++i) {
    for (int k = 0; k < config.num_classes; ++k) {
      const auto& arch = classes[k];
      SkeletonSequence seq = SkeletonSequence::zeros(config.persons, config.frames, v, 2, Modality::J);
      const double shift = uniform(rng, -0.2, 0.2);
      const double scale = uniform(rng, 0.9, 1.1);
      for (int t = 0; t < config.frames; ++t) {
        const double w = detail::kTwoPi * arch.frequency * t / config.frames + shift;
        for (int j = 0; j < v; ++j) {
          double x = rest[j][0] + scale * arch.amp_x[j] * std::sin(w + arch.phase_x[j]);
          double y = rest[j][1] + scale * arch.amp_y[j] * std::cos(w + arch.phase_y[j]);
          if (config.noise_std > 0.0) {
            x += config.noise_std * gaussian(rng);
            y += config.noise_std * gaussian(rng);
          }
          seq.at(0, t, j, 0) = static_cast<float>(x);
          seq.at(0, t, j, 1) = static_cast<float>(y);
        }
      }
      char id[32];
      std::snprintf(id, sizeof id, "%s_%05d", std::string(to_string(split)).c_str(), index++);
      seq.sample_id = id;
      seq.label = k;
      ds.sequences.push_back(std::move(seq));
    }
  }
  return ds;
}

}  // namespace hdbn
