#pragma once

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdbn/error.hpp"

namespace hdbn {

// Joint graph shared by every sequence of a dataset. Joints are vertices,
// `edges` are the bones used for graph propagation, and `parent` is the
// rooted tree used to derive bone modalities. The root maps to itself.
struct Topology {
  std::string name;
  int num_joints = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> parent;
  std::vector<int> parent2;  // two-hop ancestor, derived from parent

  int root() const {
    for (int j = 0; j < num_joints; ++j) {
      if (parent[j] == j) return j;
    }
    return -1;
  }

  friend bool operator==(const Topology&, const Topology&) = default;
};

// Checks every invariant and throws ConfigError on the first violation.
inline void validate(const Topology& topo) {
  const int v = topo.num_joints;
  if (v < 1) throw ConfigError("topology '" + topo.name + "' has no joints");
  if (static_cast<int>(topo.parent.size()) != v) {
    throw ConfigError("topology parent map has " + std::to_string(topo.parent.size()) +
                      " entries, expected " + std::to_string(v));
  }

  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : topo.edges) {
    if (a < 0 || a >= v || b < 0 || b >= v) {
      throw ConfigError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    }
    if (a == b) throw ConfigError("self-edge at joint " + std::to_string(a));
    if (!seen.insert(std::minmax(a, b)).second) {
      throw ConfigError("duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
  }

  int roots = 0;
  for (int j = 0; j < v; ++j) {
    const int p = topo.parent[j];
    if (p < 0 || p >= v) throw ConfigError("parent of joint " + std::to_string(j) + " out of range");
    if (p == j) ++roots;
  }
  if (roots != 1) throw ConfigError("parent map must have exactly one root, found " + std::to_string(roots));

  for (int j = 0; j < v; ++j) {
    int cur = j;
    int steps = 0;
    while (topo.parent[cur] != cur) {
      cur = topo.parent[cur];
      if (++steps >= v) throw ConfigError("parent map has a cycle through joint " + std::to_string(j));
    }
  }

  if (!topo.parent2.empty()) {
    if (static_cast<int>(topo.parent2.size()) != v) throw ConfigError("parent2 size mismatch");
    for (int j = 0; j < v; ++j) {
      if (topo.parent2[j] != topo.parent[topo.parent[j]]) {
        throw ConfigError("parent2 inconsistent at joint " + std::to_string(j));
      }
    }
  }
}

inline Topology make_topology(std::string name, std::vector<std::pair<int, int>> edges, std::vector<int> parent) {
  Topology topo;
  topo.name = std::move(name);
  topo.num_joints = static_cast<int>(parent.size());
  topo.edges = std::move(edges);
  topo.parent = std::move(parent);
  validate(topo);
  topo.parent2.resize(topo.parent.size());
  for (std::size_t j = 0; j < topo.parent.size(); ++j) topo.parent2[j] = topo.parent[topo.parent[j]];
  return topo;
}

// Edges implied by a parent map: one (j, parent[j]) per non-root joint.
inline std::vector<std::pair<int, int>> tree_edges(const std::vector<int>& parent) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < static_cast<int>(parent.size()); ++j) {
    if (parent[j] != j) out.emplace_back(j, parent[j]);
  }
  return out;
}

// Topology documents are JSON objects:
//   { "name": "coco17", "num_joints": 17, "edges": [[1,0], ...], "parent": [0, 0, ...] }
// parent2 is never stored; it is re-derived on load.
inline Topology parse_topology(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("topology document: ") + e.what());
  }
  try {
    auto edges = doc.at("edges").get<std::vector<std::pair<int, int>>>();
    auto parent = doc.at("parent").get<std::vector<int>>();
    const int declared = doc.at("num_joints").get<int>();
    if (declared != static_cast<int>(parent.size())) {
      throw ConfigError("num_joints " + std::to_string(declared) + " disagrees with parent map length " +
                        std::to_string(parent.size()));
    }
    return make_topology(doc.at("name").get<std::string>(), std::move(edges), std::move(parent));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("topology document: ") + e.what());
  }
}

inline std::string to_json(const Topology& topo) {
  nlohmann::json doc;
  doc["name"] = topo.name;
  doc["num_joints"] = topo.num_joints;
  doc["edges"] = topo.edges;
  doc["parent"] = topo.parent;
  return doc.dump(2) + "\n";
}

inline Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open topology file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str());
}

inline void save_topology(const std::string& path, const Topology& topo) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write topology file " + path);
  out << to_json(topo);
}

}  // namespace hdbn
