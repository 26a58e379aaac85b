#pragma once

// Late fusion of per-stream class scores: S = sum_s w_s * scores_s,
// followed by a row softmax, plus an exhaustive weight grid search.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hdbn/error.hpp"
#include "hdbn/nn.hpp"

namespace hdbn {

struct ScoreMatrix {
  std::vector<std::string> sample_ids;
  Mat logits;  // N x K
  std::string stream_name;

  int num_samples() const { return static_cast<int>(logits.rows()); }
  int num_classes() const { return static_cast<int>(logits.cols()); }
};

using LabelMap = std::map<std::string, int>;

inline void validate(const ScoreMatrix& s) {
  if (static_cast<Eigen::Index>(s.sample_ids.size()) != s.logits.rows()) {
    throw DimensionError("stream '" + s.stream_name + "' has " + std::to_string(s.sample_ids.size()) + " ids for " +
                         std::to_string(s.logits.rows()) + " rows");
  }
  if (s.logits.cols() < 2) throw DimensionError("stream '" + s.stream_name + "' has fewer than two classes");
  if (!s.logits.allFinite()) throw ArgumentError("stream '" + s.stream_name + "' has non-finite scores");
  std::set<std::string> seen;
  for (const auto& id : s.sample_ids) {
    if (!seen.insert(id).second) throw ArgumentError("stream '" + s.stream_name + "' repeats sample id '" + id + "'");
  }
}

struct FusionWeights {
  std::vector<double> weights;

  friend bool operator==(const FusionWeights&, const FusionWeights&) = default;
};

inline void validate(const FusionWeights& w) {
  bool any_positive = false;
  for (double x : w.weights) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ArgumentError("fusion weights must be finite and non-negative");
    any_positive = any_positive || x > 0.0;
  }
  if (!any_positive) throw ArgumentError("at least one fusion weight must be positive");
}

// Whether streams are combined as raw logits (default) or as per-stream
// softmax probabilities.
enum class FusionInput { Logits, Probabilities };

inline ScoreMatrix softmax_scores(const ScoreMatrix& s) {
  ScoreMatrix out = s;
  out.logits = softmax_rows(s.logits);
  return out;
}

namespace detail {

// Rows of `s` re-ordered to follow `ids`.
inline Mat align_rows(const ScoreMatrix& s, const std::vector<std::string>& ids) {
  if (s.sample_ids.size() != ids.size()) {
    throw AlignmentError("stream '" + s.stream_name + "' has " + std::to_string(s.sample_ids.size()) +
                         " samples, expected " + std::to_string(ids.size()));
  }
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < s.sample_ids.size(); ++i) row_of[s.sample_ids[i]] = static_cast<Eigen::Index>(i);
  Mat out(s.logits.rows(), s.logits.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = row_of.find(ids[i]);
    if (it == row_of.end()) throw AlignmentError("stream '" + s.stream_name + "' lacks sample '" + ids[i] + "'");
    out.row(static_cast<Eigen::Index>(i)) = s.logits.row(it->second);
  }
  return out;
}

inline std::vector<Mat> aligned_streams(const std::vector<ScoreMatrix>& streams, FusionInput input) {
  if (streams.empty()) throw ArgumentError("no streams to fuse");
  const auto& ids = streams.front().sample_ids;
  std::vector<Mat> out;
  for (const auto& s : streams) {
    validate(s);
    if (s.logits.cols() != streams.front().logits.cols()) {
      throw DimensionError("stream '" + s.stream_name + "' has " + std::to_string(s.logits.cols()) + " classes, '" +
                           streams.front().stream_name + "' has " + std::to_string(streams.front().logits.cols()));
    }
    Mat rows = align_rows(s, ids);
    out.push_back(input == FusionInput::Probabilities ? softmax_rows(rows) : std::move(rows));
  }
  return out;
}

inline std::vector<int> aligned_labels(const std::vector<std::string>& ids, const LabelMap& labels) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = labels.find(id);
    if (it == labels.end()) throw AlignmentError("no label for sample '" + id + "'");
    out.push_back(it->second);
  }
  if (labels.size() != ids.size()) throw AlignmentError("label set has samples absent from the scores");
  return out;
}

}  // namespace detail

// Weighted sum of stream scores, rows matched by sample id, output in the
// first stream's order.
inline ScoreMatrix fuse_scores(const std::vector<ScoreMatrix>& streams, const FusionWeights& w,
                               FusionInput input = FusionInput::Logits) {
  if (w.weights.size() != streams.size()) {
    throw ArgumentError(std::to_string(w.weights.size()) + " weights for " + std::to_string(streams.size()) + " streams");
  }
  validate(w);
  const std::vector<Mat> aligned = detail::aligned_streams(streams, input);
  ScoreMatrix out;
  out.sample_ids = streams.front().sample_ids;
  out.stream_name = "fused";
  out.logits = Mat::Zero(aligned.front().rows(), aligned.front().cols());
  for (std::size_t s = 0; s < aligned.size(); ++s) out.logits += w.weights[s] * aligned[s];
  return out;
}

// {0, step, 2 step, ...} below 1, then exactly 1.
inline std::vector<double> weight_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ArgumentError("grid step must lie in (0, 1]");
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double v = k * step;
    if (v >= 1.0 - 1e-9) break;
    grid.push_back(v);
  }
  grid.push_back(1.0);
  return grid;
}

struct GridSearchResult {
  FusionWeights weights;
  double accuracy = 0.0;
};

// Exhaustive search over weight_grid(step)^S minus the origin. Keeps the
// first best point in lexicographic order, so ties go to the smallest
// weight vector.
inline GridSearchResult grid_search_weights(const std::vector<ScoreMatrix>& streams, const LabelMap& labels,
                                            double grid_step = 0.1, FusionInput input = FusionInput::Logits) {
  const std::vector<double> grid = weight_grid(grid_step);
  const std::vector<Mat> aligned = detail::aligned_streams(streams, input);
  const std::vector<int> y = detail::aligned_labels(streams.front().sample_ids, labels);
  const std::size_t s_n = aligned.size();
  const Eigen::Index n = aligned.front().rows();
  if (s_n == 1) {
    // Every grid point is a positive rescaling of the single stream, so
    // report its endpoint.
    std::size_t correct = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (argmax_row(aligned.front(), r) == y[static_cast<std::size_t>(r)]) ++correct;
    }
    return {FusionWeights{{1.0}}, n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0};
  }

  // partial[s] = sum_{i<s} w_i * stream_i, accumulated in stream order so the
  // fused values equal fuse_scores() bit for bit.
  std::vector<Mat> partial(s_n + 1, Mat::Zero(n, aligned.front().cols()));
  std::vector<std::size_t> digit(s_n, 0);
  for (std::size_t s = 0; s < s_n; ++s) partial[s + 1] = partial[s] + grid[0] * aligned[s];

  GridSearchResult best;
  best.accuracy = -1.0;
  while (true) {
    // Odometer increment, last digit fastest: lexicographic order.
    std::size_t pos = s_n;
    while (pos > 0) {
      --pos;
      if (++digit[pos] < grid.size()) break;
      digit[pos] = 0;
      if (pos == 0) {
        pos = s_n;
        break;
      }
    }
    if (pos == s_n) break;
    for (std::size_t s = pos; s < s_n; ++s) partial[s + 1] = partial[s] + grid[digit[s]] * aligned[s];

    const Mat& fused = partial[s_n];
    std::size_t correct = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (argmax_row(fused, r) == y[static_cast<std::size_t>(r)]) ++correct;
    }
    const double acc = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
    if (acc > best.accuracy) {
      best.accuracy = acc;
      best.weights.weights.clear();
      for (std::size_t s = 0; s < s_n; ++s) best.weights.weights.push_back(grid[digit[s]]);
    }
  }
  return best;
}

// Score CSV: header `sample_id,c0,...,c{K-1}`, values at 17 significant digits.
inline std::string scores_to_csv(const ScoreMatrix& s) {
  validate(s);
  std::string out = "sample_id";
  for (int c = 0; c < s.num_classes(); ++c) out += ",c" + std::to_string(c);
  out += '\n';
  char buf[64];
  for (int r = 0; r < s.num_samples(); ++r) {
    if (s.sample_ids[r].find_first_of(",\n\r") != std::string::npos) {
      throw ArgumentError("sample id '" + s.sample_ids[r] + "' cannot be written to CSV");
    }
    out += s.sample_ids[r];
    for (int c = 0; c < s.num_classes(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", s.logits(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline ScoreMatrix scores_from_csv(const std::string& text, std::string stream_name = "scores") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("score CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "sample_id") throw FormatError("score CSV header must be sample_id,c0,c1,...");
  const int k = static_cast<int>(header.size()) - 1;
  for (int c = 0; c < k; ++c) {
    if (header[c + 1] != "c" + std::to_string(c)) throw FormatError("unexpected score CSV column '" + header[c + 1] + "'");
  }

  ScoreMatrix out;
  out.stream_name = std::move(stream_name);
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (static_cast<int>(cells.size()) != k + 1) {
      throw FormatError("score CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(k + 1));
    }
    out.sample_ids.push_back(cells[0]);
    for (int c = 0; c < k; ++c) {
      const std::string& v = cells[c + 1];
      double x = 0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        throw FormatError("score CSV line " + std::to_string(lineno) + ": '" + v + "' is not a number");
      }
      values.push_back(x);
    }
  }
  out.logits = Mat(static_cast<Eigen::Index>(out.sample_ids.size()), k);
  std::copy(values.begin(), values.end(), out.logits.data());
  validate(out);
  return out;
}

inline void write_scores(const std::string& path, const ScoreMatrix& s) {
  const std::string text = scores_to_csv(s);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

inline ScoreMatrix read_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scores_from_csv(buf.str(), std::filesystem::path(path).stem().string());
}

}  // namespace hdbn
