#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "hdbn/error.hpp"
#include "hdbn/skeleton.hpp"
#include "hdbn/skl1.hpp"

namespace hdbn {

// A 2D -> 3D pose lifter. Any callable works; the contract (same M/T/V,
// three finite channels) is enforced by lift_to_3d, not by the lifter.
struct PoseLifter {
  std::string name;
  std::function<SkeletonSequence(const SkeletonSequence&)> lift;
};

inline SkeletonSequence lift_to_3d(const SkeletonSequence& seq, const PoseLifter& lifter) {
  if (seq.channels != 2) throw DimensionError("lift_to_3d expects 2 channels, got " + std::to_string(seq.channels));
  if (seq.modality != Modality::J) throw ModalityError("lift_to_3d expects a joint sequence");
  if (!lifter.lift) throw ContractError("lifter '" + lifter.name + "' has no lift function");

  SkeletonSequence out = lifter.lift(seq);
  if (out.persons != seq.persons || out.frames != seq.frames || out.joints != seq.joints) {
    throw ContractError("lifter '" + lifter.name + "' changed the sequence extent");
  }
  if (out.channels != 3) {
    throw ContractError("lifter '" + lifter.name + "' returned " + std::to_string(out.channels) + " channels");
  }
  if (out.data.size() != static_cast<std::size_t>(out.persons) * out.frames * out.joints * 3) {
    throw ContractError("lifter '" + lifter.name + "' returned a malformed payload");
  }
  for (float x : out.data) {
    if (!std::isfinite(x)) throw ContractError("lifter '" + lifter.name + "' produced a non-finite value");
  }
  out.modality = Modality::J;
  out.sample_id = seq.sample_id;
  out.label = seq.label;
  return out;
}

// Stand-in lifter: (x, y) -> (x, y, 0).
inline PoseLifter zero_z_lifter() {
  return {"zero_z", [](const SkeletonSequence& seq) {
            SkeletonSequence out = SkeletonSequence::zeros(seq.persons, seq.frames, seq.joints, 3, seq.modality);
            const std::size_t points = static_cast<std::size_t>(seq.persons) * seq.frames * seq.joints;
            for (std::size_t i = 0; i < points; ++i) {
              out.data[3 * i] = seq.data[2 * i];
              out.data[3 * i + 1] = seq.data[2 * i + 1];
            }
            return out;
          }};
}

// Loads 3D poses produced offline by an external lifter.
inline SkeletonSequence load_precomputed_3d(const std::string& path) {
  SkeletonSequence seq = read_skl1(path, Modality::J);
  if (seq.channels != 3) {
    throw FormatError(path + ": expected 3 channels, file has " + std::to_string(seq.channels));
  }
  return seq;
}

}  // namespace hdbn
