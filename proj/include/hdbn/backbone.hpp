#pragma once

// Type-erased handle over the two branches plus the run configuration and
// checkpoint archive shared by the CLI and the ablation runner.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "hdbn/config.hpp"
#include "hdbn/error.hpp"
#include "hdbn/former.hpp"
#include "hdbn/gcn.hpp"
#include "hdbn/skeleton.hpp"
#include "hdbn/topology.hpp"
#include "hdbn/training.hpp"

namespace hdbn {

enum class BackboneKind { GcnStatic, GcnChannelRefined, GcnTemporalDependent, Former };

inline std::string_view to_string(BackboneKind k) {
  switch (k) {
    case BackboneKind::GcnStatic: return "gcn-static";
    case BackboneKind::GcnChannelRefined: return "gcn-ctr";
    case BackboneKind::GcnTemporalDependent: return "gcn-td";
    case BackboneKind::Former: return "former";
  }
  return "?";
}

inline BackboneKind parse_backbone(std::string_view s) {
  if (s == "gcn-static") return BackboneKind::GcnStatic;
  if (s == "gcn-ctr") return BackboneKind::GcnChannelRefined;
  if (s == "gcn-td") return BackboneKind::GcnTemporalDependent;
  if (s == "former") return BackboneKind::Former;
  throw ConfigError("unknown backbone '" + std::string(s) + "'");
}

inline bool is_gcn(BackboneKind k) { return k != BackboneKind::Former; }

inline AdjacencyMode adjacency_mode_of(BackboneKind k) {
  switch (k) {
    case BackboneKind::GcnChannelRefined: return AdjacencyMode::ChannelRefined;
    case BackboneKind::GcnTemporalDependent: return AdjacencyMode::TemporalDependent;
    default: return AdjacencyMode::Static;
  }
}

// Desk-scale schedules that train the synthetic 4-class task on one CPU.
inline TrainConfig desk_train_config(BackboneKind k) {
  TrainConfig c;
  if (is_gcn(k)) {
    c.base_lr = 0.01;
    c.milestones = {40, 50};
  } else {
    c.base_lr = 0.02;
    c.milestones = {30, 45};
  }
  c.epochs = 60;
  c.batch_size = 16;
  c.momentum = 0.9;
  c.weight_decay = 4e-4;
  // Without normalization layers the dynamic adjacency can blow up
  // activations early in training.
  c.grad_clip = 1.0;
  return c;
}

struct RunConfig {
  TrainConfig train;
  GcnArch gcn;
  FormerArch former;
  std::uint64_t model_seed = 0;
};

inline RunConfig default_run_config(BackboneKind k) {
  RunConfig rc;
  rc.train = desk_train_config(k);
  rc.gcn.mode = adjacency_mode_of(k);
  return rc;
}

// TrainConfig keys plus model_seed, gcn.channels, gcn.temporal_kernel,
// former.model_dim, former.segments, former.blocks, former.ff_dim,
// former.heads. Unknown keys are rejected.
inline RunConfig run_config_from(const KeyValueDoc& doc, BackboneKind k) {
  RunConfig rc = default_run_config(k);
  rc.train = train_config_from(doc, rc.train);
  if (doc.has("model_seed")) rc.model_seed = static_cast<std::uint64_t>(doc.get_int("model_seed"));
  if (doc.has("gcn.channels")) {
    rc.gcn.channels.clear();
    for (long long c : doc.get_int_list("gcn.channels")) rc.gcn.channels.push_back(static_cast<int>(c));
  }
  if (doc.has("gcn.temporal_kernel")) rc.gcn.temporal_kernel = static_cast<int>(doc.get_int("gcn.temporal_kernel"));
  if (doc.has("former.model_dim")) rc.former.model_dim = static_cast<int>(doc.get_int("former.model_dim"));
  if (doc.has("former.segments")) rc.former.segments = static_cast<int>(doc.get_int("former.segments"));
  if (doc.has("former.blocks")) rc.former.blocks = static_cast<int>(doc.get_int("former.blocks"));
  if (doc.has("former.ff_dim")) rc.former.ff_dim = static_cast<int>(doc.get_int("former.ff_dim"));
  if (doc.has("former.heads")) rc.former.heads = static_cast<int>(doc.get_int("former.heads"));
  if (const auto unused = doc.unused_keys(); !unused.empty()) throw ConfigError("unknown config key '" + unused.front() + "'");
  return rc;
}

class Backbone {
 public:
  Backbone() = default;

  static Backbone create(BackboneKind kind, const Topology& topo, int channels, int num_classes, const RunConfig& rc) {
    Backbone b;
    b.kind_ = kind;
    if (is_gcn(kind)) {
      GcnArch arch = rc.gcn;
      arch.mode = adjacency_mode_of(kind);
      b.model_ = GcnModel(topo, channels, num_classes, arch, rc.model_seed);
    } else {
      b.model_ = FormerModel(topo.num_joints, channels, num_classes, rc.former, rc.model_seed);
      b.topology_ = topo;
    }
    return b;
  }

  BackboneKind kind() const { return kind_; }
  Modality modality() const { return modality_; }
  void set_modality(Modality m) { modality_ = m; }

  GcnModel& gcn() { return std::get<GcnModel>(model_); }
  FormerModel& former() { return std::get<FormerModel>(model_); }
  const GcnModel& gcn() const { return std::get<GcnModel>(model_); }
  const FormerModel& former() const { return std::get<FormerModel>(model_); }

  const Topology& topology() const { return is_gcn(kind_) ? gcn().topology() : topology_; }
  int num_classes() const { return is_gcn(kind_) ? gcn().num_classes() : former().num_classes(); }
  int in_channels() const { return is_gcn(kind_) ? gcn().in_channels() : former().in_channels(); }

  ParamList parameters() {
    return std::visit([](auto& m) { return m.parameters(); }, model_);
  }

  Mat predict(const Dataset& ds, int batch_size = 32) const {
    return std::visit([&](const auto& m) { return predict_logits(m, ds, batch_size); }, model_);
  }

  TrainHistory train(const Dataset& train_set, const Dataset* val, const TrainConfig& config,
                     const TrainHooks& hooks = {}) {
    return std::visit([&](auto& m) { return train_model(m, train_set, val, config, hooks); }, model_);
  }

  // Checkpoint archive (JSON): format_version, branch, backbone, modality,
  // num_joints, num_classes, in_channels, topology, arch and a params
  // object mapping each layer name to {shape, data}.
  nlohmann::json to_archive() {
    nlohmann::json doc;
    doc["format_version"] = kFormatVersion;
    doc["branch"] = is_gcn(kind_) ? "gcn" : "former";
    doc["backbone"] = std::string(to_string(kind_));
    doc["modality"] = std::string(to_string(modality_));
    doc["num_joints"] = topology().num_joints;
    doc["num_classes"] = num_classes();
    doc["in_channels"] = in_channels();
    doc["topology"] = nlohmann::json::parse(to_json(topology()));
    if (is_gcn(kind_)) {
      doc["arch"] = {{"channels", gcn().arch().channels}, {"temporal_kernel", gcn().arch().temporal_kernel}};
    } else {
      const FormerArch& a = former().arch();
      doc["arch"] = {{"model_dim", a.model_dim}, {"segments", a.segments}, {"blocks", a.blocks},
                     {"ff_dim", a.ff_dim},       {"heads", a.heads}};
    }
    nlohmann::json params = nlohmann::json::object();
    for (const auto& p : parameters()) {
      const Mat& v = p.param->value;
      params[p.name] = {{"shape", {v.rows(), v.cols()}},
                        {"data", std::vector<double>(v.data(), v.data() + v.size())}};
    }
    doc["params"] = std::move(params);
    return doc;
  }

  // expected_joints / expected_classes <= 0 skip the corresponding check.
  static Backbone from_archive(const nlohmann::json& doc, int expected_joints = 0, int expected_classes = 0) {
    try {
      if (doc.at("format_version").get<int>() != kFormatVersion) {
        throw FormatError("unsupported checkpoint format_version " + doc.at("format_version").dump());
      }
      const int joints = doc.at("num_joints").get<int>();
      const int classes = doc.at("num_classes").get<int>();
      if (expected_joints > 0 && joints != expected_joints) {
        throw DimensionError("checkpoint has " + std::to_string(joints) + " joints, data has " +
                             std::to_string(expected_joints));
      }
      if (expected_classes > 0 && classes != expected_classes) {
        throw DimensionError("checkpoint has " + std::to_string(classes) + " classes, data has " +
                             std::to_string(expected_classes));
      }
      const BackboneKind kind = parse_backbone(doc.at("backbone").get<std::string>());
      const Topology topo = parse_topology(doc.at("topology").dump());
      if (topo.num_joints != joints) throw FormatError("checkpoint topology disagrees with num_joints");
      RunConfig rc = default_run_config(kind);
      const auto& arch = doc.at("arch");
      if (is_gcn(kind)) {
        rc.gcn.channels = arch.at("channels").get<std::vector<int>>();
        rc.gcn.temporal_kernel = arch.at("temporal_kernel").get<int>();
      } else {
        rc.former.model_dim = arch.at("model_dim").get<int>();
        rc.former.segments = arch.at("segments").get<int>();
        rc.former.blocks = arch.at("blocks").get<int>();
        rc.former.ff_dim = arch.at("ff_dim").get<int>();
        rc.former.heads = arch.at("heads").get<int>();
      }
      Backbone b = create(kind, topo, doc.at("in_channels").get<int>(), classes, rc);
      b.modality_ = parse_modality(doc.at("modality").get<std::string>());
      const auto& params = doc.at("params");
      for (const auto& p : b.parameters()) {
        if (!params.contains(p.name)) throw FormatError("checkpoint lacks parameter '" + p.name + "'");
        const auto& entry = params.at(p.name);
        const auto shape = entry.at("shape").get<std::vector<long long>>();
        const auto data = entry.at("data").get<std::vector<double>>();
        Mat& v = p.param->value;
        if (shape.size() != 2 || shape[0] != v.rows() || shape[1] != v.cols() ||
            static_cast<Eigen::Index>(data.size()) != v.size()) {
          throw FormatError("parameter '" + p.name + "' has the wrong shape");
        }
        std::copy(data.begin(), data.end(), v.data());
        p.param->reset_state();
      }
      if (params.size() != b.parameters().size()) throw FormatError("checkpoint has unexpected parameters");
      return b;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
  }

  static constexpr int kFormatVersion = 1;

 private:
  BackboneKind kind_ = BackboneKind::GcnStatic;
  Modality modality_ = Modality::J;
  std::variant<GcnModel, FormerModel> model_;
  Topology topology_;  // former only; the GCN keeps its own
};

inline void save_checkpoint(const std::string& path, Backbone& b) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out << b.to_archive().dump() << "\n";
}

inline Backbone load_checkpoint(const std::string& path, int expected_joints = 0, int expected_classes = 0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return Backbone::from_archive(doc, expected_joints, expected_classes);
}

}  // namespace hdbn
