#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "hdbn/ensemble.hpp"
#include "support/oracles.hpp"

using namespace hdbn;
using hdbn::testing::rand_int;

namespace {

ScoreMatrix scores(std::vector<std::string> ids, Mat logits, std::string name = "s") {
  return {std::move(ids), std::move(logits), std::move(name)};
}

std::vector<std::string> ids_for(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("id" + std::to_string(i));
  return ids;
}

ScoreMatrix random_scores(std::mt19937_64& rng, int n, int k, const std::string& name) {
  return scores(ids_for(n), random_matrix(n, k, rng, 2.0), name);
}

LabelMap random_labels(std::mt19937_64& rng, int n, int k) {
  LabelMap m;
  for (int i = 0; i < n; ++i) m["id" + std::to_string(i)] = rand_int(rng, 0, k - 1);
  return m;
}

std::vector<int> argmaxes(const Mat& m) {
  std::vector<int> out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(argmax_row(m, r));
  return out;
}

double accuracy(const ScoreMatrix& s, const LabelMap& labels) {
  int correct = 0;
  for (int r = 0; r < s.num_samples(); ++r) correct += argmax_row(s.logits, r) == labels.at(s.sample_ids[r]);
  return static_cast<double>(correct) / s.num_samples();
}

}  // namespace

TEST(Fuse, OneZeroIsFirstStreamBitExact) {
  std::mt19937_64 rng(1);
  const ScoreMatrix a = random_scores(rng, 6, 4, "a"), b = random_scores(rng, 6, 4, "b");
  const ScoreMatrix f = fuse_scores({a, b}, FusionWeights{{1.0, 0.0}});
  EXPECT_EQ(f.logits, a.logits);
  EXPECT_EQ(f.sample_ids, a.sample_ids);
}

TEST(Fuse, HalfHalfExample) {
  Mat la(1, 2), lb(1, 2);
  la << 2, 0;
  lb << 0, 2;
  const ScoreMatrix f = fuse_scores({scores({"x"}, la), scores({"x"}, lb)}, FusionWeights{{0.5, 0.5}});
  EXPECT_EQ(f.logits(0, 0), 1.0);
  EXPECT_EQ(f.logits(0, 1), 1.0);
}

TEST(Fuse, ThreeStreamsMatchLoopOracleWithShuffledRows) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rand_int(rng, 1, 8), k = rand_int(rng, 2, 5);
    std::vector<ScoreMatrix> streams;
    for (int s = 0; s < 3; ++s) streams.push_back(random_scores(rng, n, k, "s" + std::to_string(s)));
    // Reverse the row order of the last stream; fusion must match by id.
    ScoreMatrix& last = streams.back();
    std::reverse(last.sample_ids.begin(), last.sample_ids.end());
    const FusionWeights w{{uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0.1, 1)}};
    const ScoreMatrix f = fuse_scores(streams, w);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < k; ++c) {
        double want = 0.0;
        for (int s = 0; s < 3; ++s) {
          const auto& st = streams[s];
          const auto row = std::find(st.sample_ids.begin(), st.sample_ids.end(), f.sample_ids[r]) - st.sample_ids.begin();
          want += w.weights[s] * st.logits(row, c);
        }
        EXPECT_NEAR(f.logits(r, c), want, 1e-12);
      }
  }
}

TEST(Fuse, Errors) {
  std::mt19937_64 rng(3);
  const ScoreMatrix a = random_scores(rng, 3, 4, "a");
  EXPECT_THROW(fuse_scores({a, random_scores(rng, 4, 4, "b")}, FusionWeights{{1, 1}}), AlignmentError);
  ScoreMatrix renamed = random_scores(rng, 3, 4, "c");
  renamed.sample_ids[1] = "other";
  EXPECT_THROW(fuse_scores({a, renamed}, FusionWeights{{1, 1}}), AlignmentError);
  EXPECT_THROW(fuse_scores({a, random_scores(rng, 3, 5, "d")}, FusionWeights{{1, 1}}), DimensionError);
  EXPECT_THROW(fuse_scores({a, a}, FusionWeights{{1}}), ArgumentError);
  EXPECT_THROW(fuse_scores({a, a}, FusionWeights{{0, 0}}), ArgumentError);
  EXPECT_THROW(fuse_scores({a, a}, FusionWeights{{-1, 2}}), ArgumentError);
  EXPECT_THROW(fuse_scores({}, FusionWeights{{}}), ArgumentError);
}

TEST(Fuse, JointScalingKeepsArgmax) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ScoreMatrix> streams{random_scores(rng, 10, 5, "a"), random_scores(rng, 10, 5, "b")};
    const FusionWeights w{{uniform(rng, 0.1, 1), uniform(rng, 0, 1)}};
    const double c = std::exp(uniform(rng, -3, 3));
    const FusionWeights cw{{c * w.weights[0], c * w.weights[1]}};
    EXPECT_EQ(argmaxes(fuse_scores(streams, w).logits), argmaxes(fuse_scores(streams, cw).logits));
    EXPECT_EQ(argmaxes(softmax_scores(fuse_scores(streams, w)).logits), argmaxes(fuse_scores(streams, cw).logits));
  }
}

TEST(Fuse, StreamPermutationInvariance) {
  std::mt19937_64 rng(5);
  const ScoreMatrix a = random_scores(rng, 5, 3, "a"), b = random_scores(rng, 5, 3, "b"),
                    c = random_scores(rng, 5, 3, "c");
  const ScoreMatrix f1 = fuse_scores({a, b, c}, FusionWeights{{0.2, 0.5, 0.3}});
  const ScoreMatrix f2 = fuse_scores({c, a, b}, FusionWeights{{0.3, 0.2, 0.5}});
  EXPECT_LT(hdbn::testing::max_abs_diff(f1.logits, f2.logits), 1e-12);
}

TEST(Fuse, ProbabilityInputOption) {
  std::mt19937_64 rng(6);
  const ScoreMatrix a = random_scores(rng, 4, 3, "a");
  const ScoreMatrix f = fuse_scores({a}, FusionWeights{{1.0}}, FusionInput::Probabilities);
  EXPECT_LT(hdbn::testing::max_abs_diff(f.logits, softmax_rows(a.logits)), 1e-15);
}

TEST(Softmax, RowsSumToOneAndKeepArgmax) {
  std::mt19937_64 rng(7);
  const ScoreMatrix s = random_scores(rng, 20, 6, "a");
  const ScoreMatrix p = softmax_scores(s);
  EXPECT_LT((p.logits.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-7);
  EXPECT_EQ(argmaxes(p.logits), argmaxes(s.logits));
  Mat big(1, 2);
  big << 1000.0, 0.0;
  EXPECT_NEAR(softmax_rows(big)(0, 0), 1.0, 1e-12);
  EXPECT_TRUE(softmax_rows(big).allFinite());
}

TEST(Grid, Values) {
  EXPECT_EQ(weight_grid(1.0), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(weight_grid(0.5), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(weight_grid(0.1).size(), 11u);
  EXPECT_EQ(weight_grid(0.3).back(), 1.0);
  EXPECT_THROW(weight_grid(0.0), ArgumentError);
  EXPECT_THROW(weight_grid(1.5), ArgumentError);
}

TEST(GridSearch, SingleStreamIsItsEndpoint) {
  std::mt19937_64 rng(8);
  const ScoreMatrix s = random_scores(rng, 12, 3, "a");
  const LabelMap labels = random_labels(rng, 12, 3);
  const GridSearchResult r = grid_search_weights({s}, labels, 0.1);
  EXPECT_EQ(r.weights, FusionWeights{{1.0}});
  EXPECT_EQ(r.accuracy, accuracy(s, labels));
}

TEST(GridSearch, PerfectStreamGivesFullAccuracy) {
  std::mt19937_64 rng(9);
  const LabelMap labels = random_labels(rng, 10, 4);
  Mat onehot = Mat::Zero(10, 4);
  for (int i = 0; i < 10; ++i) onehot(i, labels.at("id" + std::to_string(i))) = 5.0;
  const GridSearchResult r = grid_search_weights({scores(ids_for(10), onehot), random_scores(rng, 10, 4, "b")}, labels);
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(GridSearch, TieGoesToSmallestWeightVector) {
  Mat la(2, 2), lb(2, 2);
  la << 2, 0, 2, 0;
  lb << 0, 2, 0, 2;
  const LabelMap labels{{"id0", 0}, {"id1", 1}};
  const GridSearchResult r = grid_search_weights({scores(ids_for(2), la), scores(ids_for(2), lb)}, labels, 0.25);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.weights, (FusionWeights{{0.0, 0.25}}));
}

TEST(GridSearch, DominatesEveryStreamAndMatchesBruteForce) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rand_int(rng, 5, 30), k = rand_int(rng, 2, 5), s_n = rand_int(rng, 2, 3);
    std::vector<ScoreMatrix> streams;
    for (int s = 0; s < s_n; ++s) streams.push_back(random_scores(rng, n, k, "s" + std::to_string(s)));
    const LabelMap labels = random_labels(rng, n, k);
    const GridSearchResult r = grid_search_weights(streams, labels, 0.25);
    for (const auto& s : streams) EXPECT_GE(r.accuracy, accuracy(s, labels));
    EXPECT_EQ(accuracy(fuse_scores(streams, r.weights), labels), r.accuracy);

    const std::vector<double> grid = weight_grid(0.25);
    double best = -1.0;
    std::vector<std::size_t> digit(s_n, 0);
    for (std::size_t code = 1; code < static_cast<std::size_t>(std::pow(grid.size(), s_n)); ++code) {
      std::size_t rest = code;
      FusionWeights w;
      w.weights.resize(s_n);
      for (int s = s_n - 1; s >= 0; --s) {
        w.weights[s] = grid[rest % grid.size()];
        rest /= grid.size();
      }
      best = std::max(best, accuracy(fuse_scores(streams, w), labels));
    }
    EXPECT_EQ(r.accuracy, best);
  }
}

TEST(GridSearch, LabelMismatch) {
  std::mt19937_64 rng(11);
  const ScoreMatrix s = random_scores(rng, 3, 2, "a");
  EXPECT_THROW(grid_search_weights({s, s}, LabelMap{{"id0", 0}}), AlignmentError);
  EXPECT_THROW(grid_search_weights({s, s}, LabelMap{{"id0", 0}, {"id1", 0}, {"id2", 1}, {"x", 1}}), AlignmentError);
}

TEST(ScoreCsv, RoundTripIsExact) {
  std::mt19937_64 rng(12);
  ScoreMatrix s = random_scores(rng, 7, 3, "a");
  s.logits(0, 0) = 1e-300;
  s.logits(1, 1) = -0.1;
  const ScoreMatrix back = scores_from_csv(scores_to_csv(s));
  EXPECT_EQ(back.logits, s.logits);
  EXPECT_EQ(back.sample_ids, s.sample_ids);
  EXPECT_EQ(scores_to_csv(back), scores_to_csv(s));

  const auto dir = std::filesystem::temp_directory_path() / "hdbn_test_scores";
  std::filesystem::create_directories(dir);
  write_scores((dir / "gcn_j.csv").string(), s);
  const ScoreMatrix file = read_scores((dir / "gcn_j.csv").string());
  EXPECT_EQ(file.stream_name, "gcn_j");
  EXPECT_EQ(file.logits, s.logits);
  EXPECT_THROW(read_scores((dir / "absent.csv").string()), IoError);
}

TEST(ScoreCsv, GoldenFixture) {
  const ScoreMatrix s = scores_from_csv("sample_id,c0,c1\na,1.5,-2\r\nb,0,3e2\n");
  ASSERT_EQ(s.num_samples(), 2);
  EXPECT_EQ(s.sample_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.logits(0, 0), 1.5);
  EXPECT_EQ(s.logits(0, 1), -2.0);
  EXPECT_EQ(s.logits(1, 1), 300.0);
}

TEST(ScoreCsv, FormatErrors) {
  EXPECT_THROW(scores_from_csv(""), FormatError);
  EXPECT_THROW(scores_from_csv("id,c0,c1\na,1,2\n"), FormatError);
  EXPECT_THROW(scores_from_csv("sample_id,c0,c2\na,1,2\n"), FormatError);
  EXPECT_THROW(scores_from_csv("sample_id,c0,c1\na,1\n"), FormatError);
  EXPECT_THROW(scores_from_csv("sample_id,c0,c1\na,1,2,3\n"), FormatError);
  EXPECT_THROW(scores_from_csv("sample_id,c0,c1\na,1,x\n"), FormatError);
  EXPECT_THROW(scores_from_csv("sample_id,c0,c1\na,1,\n"), FormatError);
  EXPECT_THROW(scores_from_csv("sample_id,c0,c1\na,1,2\na,3,4\n"), ArgumentError);
}
