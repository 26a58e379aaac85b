#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hdbn/ensemble.hpp"
#include "hdbn/error.hpp"

namespace hdbn {

struct Metrics {
  double top1 = 0.0;
  // rows = true class, cols = predicted class
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> confusion;

  long long total() const { return confusion.sum(); }
};

// Top-1 with lowest-index tie-breaking, and the matching confusion matrix.
inline Metrics evaluate(const ScoreMatrix& scores, const LabelMap& labels) {
  validate(scores);
  const std::vector<int> y = detail::aligned_labels(scores.sample_ids, labels);
  const int k = scores.num_classes();
  Metrics m;
  m.confusion.setZero(k, k);
  long long correct = 0;
  for (int r = 0; r < scores.num_samples(); ++r) {
    const int truth = y[static_cast<std::size_t>(r)];
    if (truth < 0 || truth >= k) throw ArgumentError("label " + std::to_string(truth) + " outside the score classes");
    const int pred = argmax_row(scores.logits, r);
    ++m.confusion(truth, pred);
    if (pred == truth) ++correct;
  }
  m.top1 = scores.num_samples() ? static_cast<double>(correct) / scores.num_samples() : 0.0;
  return m;
}

inline std::string confusion_csv(const Metrics& m) {
  std::ostringstream out;
  out << "true\\pred";
  for (Eigen::Index c = 0; c < m.confusion.cols(); ++c) out << ",c" << c;
  out << '\n';
  for (Eigen::Index r = 0; r < m.confusion.rows(); ++r) {
    out << 'c' << r;
    for (Eigen::Index c = 0; c < m.confusion.cols(); ++c) out << ',' << m.confusion(r, c);
    out << '\n';
  }
  return out.str();
}

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  Image(int w, int h, Rgb fill = {255, 255, 255}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}
  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Binary PPM (P6).
inline void write_ppm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  for (const Rgb& p : img.pixels) {
    const char px[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    out.write(px, 3);
  }
  if (!out) throw IoError("short write to " + path);
}

inline Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255) throw FormatError(path + " is not an 8-bit P6 image");
  in.get();
  Image img(w, h);
  for (Rgb& p : img.pixels) {
    char px[3];
    if (!in.read(px, 3)) throw FormatError(path + " pixel data truncated");
    p = {static_cast<std::uint8_t>(px[0]), static_cast<std::uint8_t>(px[1]), static_cast<std::uint8_t>(px[2])};
  }
  return img;
}

// Viridis-like ramp: dark purple at 0, yellow at 1.
inline Rgb heat_color(double v) {
  static constexpr std::array<std::array<double, 3>, 6> kStops = {{
      {68, 1, 84}, {65, 68, 135}, {42, 120, 142}, {34, 168, 132}, {122, 209, 81}, {253, 231, 37}}};
  v = std::clamp(v, 0.0, 1.0);
  const double pos = v * (kStops.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(pos), kStops.size() - 2);
  const double f = pos - static_cast<double>(i);
  auto mix = [&](int c) {
    return static_cast<std::uint8_t>(std::lround(kStops[i][c] + f * (kStops[i + 1][c] - kStops[i][c])));
  };
  return {mix(0), mix(1), mix(2)};
}

namespace detail {

// 3x5 glyphs, one row per 3-bit mask, top row first.
inline const std::array<std::uint8_t, 5>* glyph(char ch) {
  static constexpr std::array<std::array<std::uint8_t, 5>, 12> kGlyphs = {{
      {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1}, {7, 4, 7, 1, 7},
      {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7}, {7, 5, 7, 4, 4}, {7, 2, 2, 2, 2}}};
  if (ch >= '0' && ch <= '9') return &kGlyphs[ch - '0'];
  if (ch == 'P') return &kGlyphs[10];
  if (ch == 'T') return &kGlyphs[11];
  return nullptr;
}

inline void draw_text(Image& img, int x, int y, const std::string& text, int scale, Rgb color) {
  for (char ch : text) {
    if (const auto* g = glyph(ch)) {
      for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 3; ++col) {
          if (!((*g)[row] & (4 >> col))) continue;
          for (int dy = 0; dy < scale; ++dy) {
            for (int dx = 0; dx < scale; ++dx) {
              const int px = x + col * scale + dx;
              const int py = y + row * scale + dy;
              if (px >= 0 && py >= 0 && px < img.width && py < img.height) img.at(px, py) = color;
            }
          }
        }
      }
    }
    x += 4 * scale;
  }
}

}  // namespace detail

struct ConfusionPlotLayout {
  int cell = 0;
  int margin = 0;
  int width = 0;
  int height = 0;
};

inline ConfusionPlotLayout confusion_plot_layout(int classes) {
  ConfusionPlotLayout l;
  l.cell = std::clamp(768 / std::max(classes, 1), 4, 32);
  l.margin = 8 + 4 * 2 * static_cast<int>(std::to_string(std::max(classes - 1, 0)).size());
  l.width = l.margin + classes * l.cell + 4;
  l.height = l.width;
  return l;
}

// Row-normalised heatmap; rows are true classes, columns predictions.
// Rows with no samples render as zeros.
inline Image render_confusion(const Metrics& m) {
  const int k = static_cast<int>(m.confusion.rows());
  if (k < 1 || m.confusion.cols() != k) throw DimensionError("confusion matrix must be square and non-empty");
  const ConfusionPlotLayout l = confusion_plot_layout(k);
  Image img(l.width, l.height);
  for (int r = 0; r < k; ++r) {
    const long long row_sum = m.confusion.row(r).sum();
    for (int c = 0; c < k; ++c) {
      const double v = row_sum > 0 ? static_cast<double>(m.confusion(r, c)) / static_cast<double>(row_sum) : 0.0;
      const Rgb color = heat_color(v);
      for (int y = 0; y < l.cell; ++y) {
        for (int x = 0; x < l.cell; ++x) img.at(l.margin + c * l.cell + x, l.margin + r * l.cell + y) = color;
      }
    }
  }
  // Axis labels: class indices when they fit, T (true) on the left, P (predicted) on top.
  const Rgb ink{0, 0, 0};
  detail::draw_text(img, 1, 1, "T", 1, ink);
  detail::draw_text(img, 5, 1, "P", 1, ink);
  const int text_scale = 2;
  if (l.cell >= 12) {
    for (int i = 0; i < k; ++i) {
      const std::string label = std::to_string(i);
      const int text_w = static_cast<int>(label.size()) * 4 * text_scale - text_scale;
      if (text_w > l.margin - 2) continue;
      detail::draw_text(img, l.margin + i * l.cell + (l.cell - text_w) / 2, l.margin - 5 * text_scale - 2, label,
                        text_scale, ink);
      detail::draw_text(img, l.margin - text_w - 2, l.margin + i * l.cell + (l.cell - 5 * text_scale) / 2, label,
                        text_scale, ink);
    }
  }
  return img;
}

inline void plot_confusion(const Metrics& m, const std::string& path) { write_ppm(path, render_confusion(m)); }

}  // namespace hdbn
