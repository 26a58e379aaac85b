#pragma once

// Modality ablation runner. A spec lists streams, each one backbone trained
// on one derived modality, plus the fusion grid step:
//
//   { "grid_step": 0.1,
//     "streams": [ {"backbone": "gcn-ctr", "modality": "J", "dims": 2},
//                  {"backbone": "former", "modality": "B", "dims": 3, "config": "former.cfg"} ] }
//
// A bare array of stream records is accepted too. Relative config paths are
// resolved against the spec file's directory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdbn/backbone.hpp"
#include "hdbn/dataset_io.hpp"
#include "hdbn/ensemble.hpp"
#include "hdbn/error.hpp"
#include "hdbn/metrics.hpp"
#include "hdbn/pose_lift.hpp"
#include "hdbn/skeleton.hpp"
#include "hdbn/topology.hpp"

namespace hdbn {

struct AblationStream {
  BackboneKind backbone = BackboneKind::GcnStatic;
  Modality modality = Modality::J;
  int dims = 2;
  std::string config;  // empty = desk defaults

  std::string name() const {
    return std::string(to_string(backbone)) + "_" + std::string(to_string(modality)) + "_" + std::to_string(dims) + "d";
  }

  friend bool operator==(const AblationStream&, const AblationStream&) = default;
};

struct AblationSpec {
  double grid_step = 0.1;
  std::vector<AblationStream> streams;

  friend bool operator==(const AblationSpec&, const AblationSpec&) = default;
};

inline void validate(const AblationSpec& spec) {
  if (spec.streams.empty()) throw ConfigError("ablation spec lists no streams");
  if (!(spec.grid_step > 0.0 && spec.grid_step <= 1.0)) throw ConfigError("ablation grid_step must lie in (0, 1]");
  for (const auto& s : spec.streams) {
    if (s.dims != 2 && s.dims != 3) throw ConfigError("stream dims must be 2 or 3, got " + std::to_string(s.dims));
  }
}

inline AblationSpec parse_ablation_spec(const std::string& text) {
  AblationSpec spec;
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    const nlohmann::json* records = &doc;
    if (doc.is_object()) {
      for (const auto& [key, value] : doc.items()) {
        if (key != "grid_step" && key != "streams") throw ConfigError("unknown ablation spec key '" + key + "'");
      }
      if (doc.contains("grid_step")) spec.grid_step = doc.at("grid_step").get<double>();
      records = &doc.at("streams");
    }
    if (!records->is_array()) throw ConfigError("ablation streams must be an array");
    for (const auto& r : *records) {
      for (const auto& [key, value] : r.items()) {
        if (key != "backbone" && key != "modality" && key != "dims" && key != "config") {
          throw ConfigError("unknown stream key '" + key + "'");
        }
      }
      AblationStream s;
      s.backbone = parse_backbone(r.at("backbone").get<std::string>());
      try {
        s.modality = parse_modality(r.at("modality").get<std::string>());
      } catch (const ModalityError& e) {
        throw ConfigError(e.what());
      }
      if (r.contains("dims")) s.dims = r.at("dims").get<int>();
      if (r.contains("config")) s.config = r.at("config").get<std::string>();
      spec.streams.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ablation spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

// Canonical form: object layout, every field spelled out.
inline std::string to_json(const AblationSpec& spec) {
  nlohmann::json doc;
  doc["grid_step"] = spec.grid_step;
  doc["streams"] = nlohmann::json::array();
  for (const auto& s : spec.streams) {
    doc["streams"].push_back({{"backbone", std::string(to_string(s.backbone))},
                              {"modality", std::string(to_string(s.modality))},
                              {"dims", s.dims},
                              {"config", s.config}});
  }
  return doc.dump(2) + "\n";
}

inline AblationSpec load_ablation_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ablation spec " + path);
  std::ostringstream text;
  text << in.rdbuf();
  AblationSpec spec = parse_ablation_spec(text.str());
  const auto base = std::filesystem::path(path).parent_path();
  for (auto& s : spec.streams) {
    if (!s.config.empty() && std::filesystem::path(s.config).is_relative()) s.config = (base / s.config).string();
  }
  return spec;
}

// Lifts (for dims 3) and then derives the modality from raw joints.
inline Dataset prepare_stream_data(const Dataset& joints, const Topology& topo, Modality modality, int dims,
                                   const PoseLifter& lifter = zero_z_lifter()) {
  Dataset out;
  out.num_classes = joints.num_classes;
  out.split = joints.split;
  out.sequences.reserve(joints.size());
  for (const auto& seq : joints.sequences) {
    if (seq.modality != Modality::J) throw ModalityError("ablation input must be raw joints");
    SkeletonSequence base = dims == 3 && seq.channels == 2 ? lift_to_3d(seq, lifter) : seq;
    if (base.channels != dims) {
      throw DimensionError("sample '" + seq.sample_id + "' has " + std::to_string(base.channels) +
                           " channels, stream wants " + std::to_string(dims));
    }
    out.sequences.push_back(derive_modality(base, topo, modality));
  }
  return out;
}

struct AblationRow {
  AblationStream stream;
  std::string score_file;
  Metrics metrics;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  FusionWeights weights;
  Metrics fused;
  std::string markdown;
};

struct AblationOptions {
  std::string out_dir;                 // empty = keep scores in memory only
  std::optional<std::uint64_t> seed;   // overrides every stream's train and model seed
  std::function<void(const std::string&)> log;
};

inline std::string ablation_markdown(const AblationReport& r) {
  std::string out = "| stream | backbone | dims |";
  for (Modality m : kAllModalities) out += " " + std::string(to_string(m)) + " |";
  out += " top-1 (%) |\n|---|---|---|";
  for ([[maybe_unused]] Modality m : kAllModalities) out += ":-:|";
  out += "--:|\n";
  char buf[32];
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    out += "| " + std::to_string(i) + " | " + std::string(to_string(row.stream.backbone)) + " | " +
           std::to_string(row.stream.dims) + "D |";
    for (Modality m : kAllModalities) out += m == row.stream.modality ? " x |" : "  |";
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * row.metrics.top1);
    out += std::string(" ") + buf + " |\n";
  }
  out += "| fused | weights";
  for (std::size_t i = 0; i < r.weights.weights.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%g", i ? "/" : " ", r.weights.weights[i]);
    out += buf;
  }
  out += " | |";
  for (Modality m : kAllModalities) {
    bool used = false;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      if (r.rows[i].stream.modality == m && r.weights.weights[i] > 0.0) used = true;
    }
    out += used ? " x |" : "  |";
  }
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * r.fused.top1);
  out += std::string(" ") + buf + " |\n";
  return out;
}

// Trains every stream on `train`, scores `val`, grid-searches the fusion
// weights on `val` and reports per-stream and fused accuracy. Both datasets
// hold raw 2D or 3D joints.
inline AblationReport run_ablation(const AblationSpec& spec, const Dataset& train, const Dataset& val,
                                   const Topology& topo, const AblationOptions& options = {}) {
  validate(spec);
  if (val.empty()) throw ArgumentError("ablation needs a non-empty validation split");
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);
  const LabelMap labels = label_map(val);

  AblationReport report;
  std::vector<ScoreMatrix> scores;
  for (std::size_t i = 0; i < spec.streams.size(); ++i) {
    const AblationStream& s = spec.streams[i];
    RunConfig rc = s.config.empty() ? default_run_config(s.backbone)
                                    : run_config_from(KeyValueDoc::load(s.config), s.backbone);
    if (options.seed) {
      rc.train.seed = *options.seed;
      rc.model_seed = *options.seed;
    }
    const Dataset train_s = prepare_stream_data(train, topo, s.modality, s.dims);
    const Dataset val_s = prepare_stream_data(val, topo, s.modality, s.dims);
    if (options.log) options.log("stream " + std::to_string(i) + ": " + s.name());

    Backbone model = Backbone::create(s.backbone, topo, s.dims, train.num_classes, rc);
    model.set_modality(s.modality);
    model.train(train_s, &val_s, rc.train);

    ScoreMatrix sm;
    sm.stream_name = std::to_string(i) + "_" + s.name();
    sm.logits = model.predict(val_s);
    for (const auto& seq : val_s.sequences) sm.sample_ids.push_back(seq.sample_id);

    AblationRow row{s, {}, evaluate(sm, labels)};
    if (!options.out_dir.empty()) {
      row.score_file = (std::filesystem::path(options.out_dir) / (sm.stream_name + ".csv")).string();
      write_scores(row.score_file, sm);
    }
    if (options.log) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "  val top-1 %.4f", row.metrics.top1);
      options.log(buf);
    }
    report.rows.push_back(std::move(row));
    scores.push_back(std::move(sm));
  }

  const GridSearchResult best = grid_search_weights(scores, labels, spec.grid_step);
  report.weights = best.weights;
  const ScoreMatrix fused = fuse_scores(scores, best.weights);
  report.fused = evaluate(fused, labels);
  report.markdown = ablation_markdown(report);
  if (!options.out_dir.empty()) {
    const std::filesystem::path dir(options.out_dir);
    write_scores((dir / "fused.csv").string(), fused);
    std::ofstream md(dir / "report.md");
    if (!md) throw IoError("cannot write " + (dir / "report.md").string());
    md << report.markdown;
  }
  return report;
}

}  // namespace hdbn
