#pragma once

// On-disk dataset: a directory with one SKL1 file per sample and a
// manifest.json listing ids, files and splits:
//   { "num_classes": 4, "topology": "coco17",
//     "splits": { "train": [ {"id": "train_00000", "file": "train/train_00000.skl1"}, ... ],
//                 "val": [ ... ] } }
// Labels live in the SKL1 label field.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdbn/ensemble.hpp"
#include "hdbn/error.hpp"
#include "hdbn/skeleton.hpp"
#include "hdbn/skl1.hpp"

namespace hdbn {

inline void write_dataset(const std::string& dir, const std::vector<const Dataset*>& splits,
                          const std::string& topology_name) {
  namespace fs = std::filesystem;
  if (splits.empty()) throw ArgumentError("no splits to write");
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["num_classes"] = splits.front()->num_classes;
  manifest["topology"] = topology_name;
  manifest["splits"] = nlohmann::json::object();
  for (const Dataset* ds : splits) {
    validate(*ds);
    const std::string split(to_string(ds->split));
    fs::create_directories(fs::path(dir) / split);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& seq : ds->sequences) {
      if (seq.sample_id.empty() || seq.sample_id.find_first_of("/\\") != std::string::npos ||
          seq.sample_id == "." || seq.sample_id == "..") {
        throw ArgumentError("sample id '" + seq.sample_id + "' cannot be used as a file name");
      }
      const std::string rel = split + "/" + seq.sample_id + ".skl1";
      write_skl1((fs::path(dir) / rel).string(), seq);
      entries.push_back({{"id", seq.sample_id}, {"file", rel}});
    }
    manifest["splits"][split] = std::move(entries);
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

inline nlohmann::json read_manifest(const std::string& dir) {
  const auto path = std::filesystem::path(dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline Dataset read_dataset(const std::string& dir, Split split) {
  const nlohmann::json manifest = read_manifest(dir);
  Dataset ds;
  ds.split = split;
  try {
    ds.num_classes = manifest.at("num_classes").get<int>();
    const std::string key(to_string(split));
    if (!manifest.at("splits").contains(key)) throw ArgumentError("dataset " + dir + " has no '" + key + "' split");
    for (const auto& entry : manifest.at("splits").at(key)) {
      SkeletonSequence seq = read_skl1((std::filesystem::path(dir) / entry.at("file").get<std::string>()).string());
      seq.sample_id = entry.at("id").get<std::string>();
      ds.sequences.push_back(std::move(seq));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest in " + dir + ": " + e.what());
  }
  validate(ds);
  return ds;
}

inline LabelMap label_map(const Dataset& ds) {
  LabelMap out;
  for (const auto& s : ds.sequences) {
    if (!s.label) throw ArgumentError("sample '" + s.sample_id + "' has no label");
    out[s.sample_id] = *s.label;
  }
  return out;
}

}  // namespace hdbn
