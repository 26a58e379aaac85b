#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "hdbn/metrics.hpp"
#include "support/oracles.hpp"

using namespace hdbn;
using hdbn::testing::rand_int;

namespace {

ScoreMatrix make_scores(const Mat& logits) {
  ScoreMatrix s;
  s.logits = logits;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) s.sample_ids.push_back("n" + std::to_string(i));
  return s;
}

LabelMap make_labels(const std::vector<int>& y) {
  LabelMap m;
  for (std::size_t i = 0; i < y.size(); ++i) m["n" + std::to_string(i)] = y[i];
  return m;
}

}  // namespace

TEST(Evaluate, OneHotScoresArePerfect) {
  const std::vector<int> y{0, 2, 1, 2};
  Mat logits = Mat::Zero(4, 3);
  for (int i = 0; i < 4; ++i) logits(i, y[i]) = 1.0;
  const Metrics m = evaluate(make_scores(logits), make_labels(y));
  EXPECT_EQ(m.top1, 1.0);
  EXPECT_EQ(m.confusion(0, 0), 1);
  EXPECT_EQ(m.confusion(1, 1), 1);
  EXPECT_EQ(m.confusion(2, 2), 2);
  EXPECT_EQ(m.total(), 4);
}

TEST(Evaluate, TiesGoToLowestClass) {
  const Metrics m = evaluate(make_scores(Mat::Zero(3, 3)), make_labels({1, 2, 1}));
  EXPECT_EQ(m.top1, 0.0);
  EXPECT_EQ(m.confusion.col(0).sum(), 3);
}

TEST(Evaluate, MatchesLoopOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rand_int(rng, 1, 40), k = rand_int(rng, 2, 7);
    Mat logits = random_matrix(n, k, rng);
    // Quantise to force some ties.
    logits = (logits.array() * 2.0).round().matrix();
    std::vector<int> y;
    for (int i = 0; i < n; ++i) y.push_back(rand_int(rng, 0, k - 1));
    const Metrics m = evaluate(make_scores(logits), make_labels(y));

    std::vector<std::vector<long long>> conf(k, std::vector<long long>(k, 0));
    int correct = 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int c = 1; c < k; ++c)
        if (logits(i, c) > logits(i, best)) best = c;
      ++conf[y[i]][best];
      correct += best == y[i];
    }
    EXPECT_EQ(m.top1, static_cast<double>(correct) / n);
    for (int r = 0; r < k; ++r) {
      long long row = 0;
      for (int c = 0; c < k; ++c) {
        EXPECT_EQ(m.confusion(r, c), conf[r][c]);
        row += conf[r][c];
      }
      EXPECT_EQ(m.confusion.row(r).sum(), std::count(y.begin(), y.end(), r));
    }
    EXPECT_EQ(static_cast<double>(m.confusion.trace()) / m.total(), m.top1);
    EXPECT_EQ(m.total(), n);
  }
}

TEST(Evaluate, Errors) {
  EXPECT_THROW(evaluate(make_scores(Mat::Zero(2, 2)), make_labels({0})), AlignmentError);
  EXPECT_THROW(evaluate(make_scores(Mat::Zero(2, 2)), make_labels({0, 5})), ArgumentError);
}

TEST(ConfusionCsv, Layout) {
  const Metrics m = evaluate(make_scores(Mat::Identity(2, 2)), make_labels({0, 0}));
  EXPECT_EQ(confusion_csv(m), "true\\pred,c0,c1\nc0,1,1\nc1,0,0\n");
}

TEST(HeatColor, EndsAndMonotoneLuminance) {
  EXPECT_EQ(heat_color(0.0), (Rgb{68, 1, 84}));
  EXPECT_EQ(heat_color(1.0), (Rgb{253, 231, 37}));
  EXPECT_EQ(heat_color(-1.0), heat_color(0.0));
  auto lum = [](Rgb c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; };
  for (int i = 1; i <= 100; ++i) EXPECT_GE(lum(heat_color(i / 100.0)), lum(heat_color((i - 1) / 100.0)) - 1.0);
}

TEST(PlotConfusion, IdentityHasHottestColorOnDiagonal) {
  const int k = 5;
  Metrics m;
  m.confusion.setIdentity(k, k);
  const Image img = render_confusion(m);
  const ConfusionPlotLayout l = confusion_plot_layout(k);
  const Rgb hot = heat_color(1.0), cold = heat_color(0.0);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) {
      const Rgb px = img.at(l.margin + c * l.cell + l.cell / 2, l.margin + r * l.cell + l.cell / 2);
      EXPECT_EQ(px, r == c ? hot : cold);
    }
}

TEST(PlotConfusion, TwoClassFixtureDimensions) {
  Metrics m;
  m.confusion.resize(2, 2);
  m.confusion << 3, 1, 0, 4;
  const auto dir = std::filesystem::temp_directory_path() / "hdbn_test_plot";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "k2.ppm").string();
  plot_confusion(m, path);
  const Image img = read_ppm(path);
  EXPECT_EQ(img.width, 8 + 8 + 2 * 32 + 4);
  EXPECT_EQ(img.height, img.width);
  const Image direct = render_confusion(m);
  EXPECT_EQ(img.pixels, direct.pixels);
  const ConfusionPlotLayout l = confusion_plot_layout(2);
  EXPECT_EQ(img.at(l.margin + l.cell + 1, l.margin + 1), heat_color(0.25));
}

TEST(PlotConfusion, EmptyRowRendersAsZeros) {
  Metrics m;
  m.confusion.resize(3, 3);
  m.confusion << 2, 0, 0, 0, 0, 0, 0, 1, 1;
  const Image img = render_confusion(m);
  const ConfusionPlotLayout l = confusion_plot_layout(3);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(img.at(l.margin + c * l.cell + 2, l.margin + l.cell + 2), heat_color(0.0));
  EXPECT_EQ(img.at(l.margin + 2, l.margin + 2), heat_color(1.0));
}

TEST(PlotConfusion, RejectsNonSquare) {
  Metrics m;
  m.confusion.setZero(2, 3);
  EXPECT_THROW(render_confusion(m), DimensionError);
  m.confusion.resize(0, 0);
  EXPECT_THROW(render_confusion(m), DimensionError);
}
