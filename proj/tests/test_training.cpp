#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hdbn/synth.hpp"
#include "hdbn/training.hpp"
#include "support/oracles.hpp"

using namespace hdbn;

namespace {

// Mean-pooled linear classifier; small enough to train in milliseconds.
struct LinearModel {
  struct Cache {
    Mat pooled;
  };
  Param weight;
  Param bias;

  LinearModel(int channels, int classes, std::uint64_t seed) : weight(channels, classes), bias(1, classes) {
    std::mt19937_64 rng(seed);
    weight.value = random_matrix(channels, classes, rng, 0.1);
    weight.reset_state();
  }

  Mat pool(const SequenceBatch& b) const {
    const Eigen::Index per = static_cast<Eigen::Index>(b.persons) * b.frames * b.joints;
    Mat out(b.samples, b.channels);
    for (int n = 0; n < b.samples; ++n) out.row(n) = b.values.middleRows(n * per, per).colwise().mean();
    return out;
  }
  Mat forward(const SequenceBatch& b, Cache* cache = nullptr) const {
    Mat pooled = pool(b);
    Mat logits = (pooled * weight.value).rowwise() + bias.value.row(0);
    if (cache) cache->pooled = std::move(pooled);
    return logits;
  }
  void backward(const Cache& cache, const Mat& dlogits) {
    weight.grad += cache.pooled.transpose() * dlogits;
    bias.grad += dlogits.colwise().sum();
  }
  ParamList parameters() { return {{"weight", &weight}, {"bias", &bias}}; }
};

Topology chain(int v) {
  std::vector<int> parent(v);
  for (int i = 0; i < v; ++i) parent[i] = i == 0 ? 0 : i - 1;
  return make_topology("chain", tree_edges(parent), parent);
}

// Two classes separated by the sign of every coordinate.
Dataset separable(int per_class, Split split, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset ds;
  ds.num_classes = 2;
  ds.split = split;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < per_class; ++i) {
      SkeletonSequence s = SkeletonSequence::zeros(1, 4, 3, 2);
      for (float& x : s.data) x = static_cast<float>((k == 0 ? 1.0 : -1.0) + uniform(rng, -0.5, 0.5));
      s.label = k;
      s.sample_id = "s" + std::to_string(k) + "_" + std::to_string(i);
      ds.sequences.push_back(s);
    }
  return ds;
}

}  // namespace

TEST(CrossEntropy, UniformLogits) {
  const LossResult r = cross_entropy_loss(Mat::Zero(3, 4), {0, 1, 3});
  EXPECT_NEAR(r.loss, std::log(4.0), 1e-12);
}

TEST(CrossEntropy, SaturatedCorrectClass) {
  Mat logits = Mat::Zero(1, 3);
  logits(0, 2) = 100.0;
  EXPECT_LT(cross_entropy_loss(logits, {2}).loss, 1e-6);
  EXPECT_TRUE(std::isfinite(cross_entropy_loss(logits, {0}).loss));
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int b = hdbn::testing::rand_int(rng, 1, 5), k = hdbn::testing::rand_int(rng, 2, 6);
    Mat logits = random_matrix(b, k, rng, 3.0);
    std::vector<int> labels;
    for (int i = 0; i < b; ++i) labels.push_back(hdbn::testing::rand_int(rng, 0, k - 1));
    const LossResult r = cross_entropy_loss(logits, labels);
    EXPECT_LT(r.grad.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 0; i < b; ++i)
      for (int j = 0; j < k; ++j) {
        const double h = 1e-5, saved = logits(i, j);
        logits(i, j) = saved + h;
        const double up = cross_entropy_loss(logits, labels).loss;
        logits(i, j) = saved - h;
        const double down = cross_entropy_loss(logits, labels).loss;
        logits(i, j) = saved;
        EXPECT_NEAR(r.grad(i, j), (up - down) / (2 * h), 1e-4);
      }
  }
}

TEST(CrossEntropy, RejectsBadLabels) {
  EXPECT_ANY_THROW(cross_entropy_loss(Mat::Zero(2, 3), {0}));
  EXPECT_ANY_THROW(cross_entropy_loss(Mat::Zero(1, 3), {3}));
}

TEST(LearningRate, StepSchedule) {
  TrainConfig c;
  c.base_lr = 0.1;
  c.decay_factor = 0.1;
  c.milestones = {35, 55};
  c.epochs = 65;
  EXPECT_NEAR(lr_at_epoch(c, 0), 0.1, 1e-15);
  EXPECT_NEAR(lr_at_epoch(c, 34), 0.1, 1e-15);
  EXPECT_NEAR(lr_at_epoch(c, 35), 0.01, 1e-15);
  EXPECT_NEAR(lr_at_epoch(c, 54), 0.01, 1e-15);
  EXPECT_NEAR(lr_at_epoch(c, 55), 0.001, 1e-15);
  EXPECT_NEAR(lr_at_epoch(c, 64), 0.001, 1e-15);
  for (int e = 1; e < 65; ++e) EXPECT_LE(lr_at_epoch(c, e), lr_at_epoch(c, e - 1));
}

TEST(LearningRate, FullScalePresets) {
  const TrainConfig g = full_scale_gcn_config();
  EXPECT_EQ(g.milestones, (std::vector<int>{35, 55}));
  EXPECT_EQ(g.epochs, 65);
  EXPECT_EQ(g.batch_size, 64);
  const TrainConfig f = full_scale_former_config();
  EXPECT_EQ(f.epochs, 90);
  EXPECT_EQ(f.batch_size, 128);
  EXPECT_DOUBLE_EQ(lr_at_epoch(f, 89), 0.02);
}

TEST(Sgd, SingleStepExample) {
  Mat p = Mat::Constant(1, 1, 1.0), v = Mat::Zero(1, 1);
  sgd_step(p, Mat::Constant(1, 1, 0.5), v, 0.1, 0.9, 0.0);
  EXPECT_NEAR(v(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p(0, 0), 0.95, 1e-15);
}

TEST(Sgd, TwoStepRecurrenceWithDecay) {
  Mat p = Mat::Constant(1, 1, 2.0), v = Mat::Zero(1, 1);
  const double lr = 0.05, mu = 0.9, wd = 0.01;
  double pe = 2.0, ve = 0.0;
  for (double g : {0.3, -0.7}) {
    sgd_step(p, Mat::Constant(1, 1, g), v, lr, mu, wd);
    ve = mu * ve + g + wd * pe;
    pe -= lr * ve;
    EXPECT_NEAR(v(0, 0), ve, 1e-14);
    EXPECT_NEAR(p(0, 0), pe, 1e-14);
  }
}

TEST(Sgd, ZeroLearningRateLeavesParameters) {
  std::mt19937_64 rng(2);
  Mat p = random_matrix(3, 4, rng), v = Mat::Zero(3, 4);
  const Mat before = p;
  sgd_step(p, random_matrix(3, 4, rng), v, 0.0, 0.9, 4e-4);
  EXPECT_EQ(p, before);
  Mat g = Mat::Zero(2, 2);
  EXPECT_THROW(sgd_step(p, g, v, 0.1, 0.9, 0.0), DimensionError);
}

TEST(GradientClip, RescalesGlobalNorm) {
  Param a(1, 2), b(1, 1);
  a.grad << 3.0, 0.0;
  b.grad << 4.0;
  const ParamList params{{"a", &a}, {"b", &b}};
  EXPECT_DOUBLE_EQ(clip_gradients(params, 10.0), 5.0);
  EXPECT_DOUBLE_EQ(gradient_norm(params), 5.0);
  EXPECT_DOUBLE_EQ(clip_gradients(params, 1.0), 5.0);
  EXPECT_NEAR(gradient_norm(params), 1.0, 1e-15);
  EXPECT_NEAR(a.grad(0, 0) / b.grad(0, 0), 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(clip_gradients(params, 0.0), gradient_norm(params));
}

TEST(FiniteDifference, QuadraticIsExact) {
  std::mt19937_64 rng(3);
  Param x(random_matrix(3, 3, rng));
  const Mat target = random_matrix(3, 3, rng);
  x.grad = x.value - target;
  const ParamList params{{"x", &x}};
  auto loss = [&] { return 0.5 * (x.value - target).squaredNorm(); };
  const GradientCheckReport r = finite_difference_check(loss, params, 30, 4);
  EXPECT_EQ(r.probes, 30);
  EXPECT_LT(r.max_relative_error, 1e-6);
  EXPECT_THROW(finite_difference_check(loss, params, 0), ArgumentError);
}

TEST(FiniteDifference, KinkStraddlingProbesAreResampled) {
  // relu(x - 0.0004) at x = 0: the analytic slope is 0, but a 1e-3 central
  // difference straddles the kink and reports 0.3.
  Param x(Mat::Zero(1, 1));
  x.grad.setZero();
  const ParamList params{{"x", &x}};
  auto loss = [&] { return std::max(x.value(0, 0) - 0.0004, 0.0); };
  EXPECT_GT(finite_difference_check(loss, params, 5).max_relative_error, 0.1);
  auto pattern = [&] { return std::vector<bool>{x.value(0, 0) - 0.0004 > 0.0}; };
  const GradientCheckReport r = finite_difference_check(loss, params, 5, 0, 1e-3, pattern);
  EXPECT_EQ(r.probes, 0);
  EXPECT_EQ(r.skipped, 250);
  x.value(0, 0) = 0.01;
  x.grad(0, 0) = 1.0;
  const GradientCheckReport smooth = finite_difference_check(loss, params, 5, 0, 1e-3, pattern);
  EXPECT_EQ(smooth.probes, 5);
  EXPECT_EQ(smooth.skipped, 0);
  EXPECT_LT(smooth.max_relative_error, 1e-9);
}

TEST(TrainModel, LossDecreasesAndFits) {
  const Dataset train = separable(20, Split::Train, 4);
  const Dataset val = separable(10, Split::Val, 5);
  LinearModel model(2, 2, 6);
  TrainConfig c;
  c.base_lr = 0.5;
  c.epochs = 20;
  c.batch_size = 8;
  c.milestones = {15};
  const TrainHistory h = train_model(model, train, &val, c);
  ASSERT_EQ(h.epochs.size(), 20u);
  EXPECT_LT(h.epochs.back().train_loss, h.epochs.front().train_loss);
  EXPECT_EQ(h.epochs.back().val_acc, 1.0);
  EXPECT_DOUBLE_EQ(h.epochs[15].lr, 0.05);
  EXPECT_EQ(dataset_accuracy(model, train), 1.0);
}

TEST(TrainModel, DeterministicHistory) {
  const Dataset train = separable(12, Split::Train, 7);
  TrainConfig c;
  c.epochs = 5;
  c.batch_size = 5;
  c.seed = 11;
  LinearModel a(2, 2, 1), b(2, 2, 1);
  EXPECT_EQ(history_csv(train_model(a, train, nullptr, c)), history_csv(train_model(b, train, nullptr, c)));
  EXPECT_EQ(a.weight.value, b.weight.value);
}

TEST(TrainModel, HooksAndEarlyStop) {
  const Dataset train = separable(6, Split::Train, 8);
  const Dataset val = separable(4, Split::Val, 9);
  LinearModel model(2, 2, 2);
  TrainConfig c;
  c.epochs = 10;
  int best_calls = 0;
  TrainHooks hooks;
  hooks.on_best_val = [&](int, double) { ++best_calls; };
  hooks.on_epoch = [](const EpochRecord& r) { return r.epoch < 2; };
  const TrainHistory h = train_model(model, train, &val, c, hooks);
  EXPECT_EQ(h.epochs.size(), 3u);
  EXPECT_GE(best_calls, 1);
}

TEST(TrainModel, RejectsEmptyOrWrongSplit) {
  LinearModel model(2, 2, 0);
  Dataset empty;
  empty.num_classes = 2;
  EXPECT_THROW(train_model(model, empty, nullptr, TrainConfig{}), ArgumentError);
  EXPECT_THROW(train_model(model, separable(2, Split::Val, 0), nullptr, TrainConfig{}), ArgumentError);
  TrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(train_model(model, separable(2, Split::Train, 0), nullptr, bad), ConfigError);
}

TEST(TrainModel, NonFiniteInputIsReported) {
  Dataset train = separable(2, Split::Train, 0);
  train.sequences[0].data[0] = std::numeric_limits<float>::infinity();
  LinearModel model(2, 2, 0);
  EXPECT_THROW(train_model(model, train, nullptr, TrainConfig{}), Error);
}

TEST(TrainModel, WorksOnSyntheticSkeletons) {
  SynthConfig sc;
  sc.samples_per_class = 4;
  sc.frames = 6;
  const Topology topo = chain(5);
  const Dataset train = generate_synthetic(sc, topo, Split::Train);
  LinearModel model(2, sc.num_classes, 3);
  TrainConfig c;
  c.epochs = 2;
  EXPECT_EQ(train_model(model, train, nullptr, c).epochs.size(), 2u);
}
