#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "hdbn/backbone.hpp"
#include "hdbn/config.hpp"
#include "hdbn/dataset_io.hpp"
#include "hdbn/pose_lift.hpp"
#include "hdbn/skl1.hpp"
#include "hdbn/synth.hpp"
#include "support/oracles.hpp"

using namespace hdbn;
using hdbn::testing::random_sequence;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hdbn_test_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Topology coco() { return load_topology(std::string(HDBN_DATA_DIR) + "/coco17.json"); }

}  // namespace

TEST(Skl1, HeaderLayout) {
  SkeletonSequence s = SkeletonSequence::zeros(1, 2, 3, 2);
  s.label = 7;
  s.data[0] = 1.5f;
  const auto bytes = encode_skl1(s);
  ASSERT_EQ(bytes.size(), 24u + 12u * 4u);
  EXPECT_EQ(std::memcmp(bytes.data(), "SKL1", 4), 0);
  const std::uint8_t header[20] = {1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 2, 0, 0, 0, 7, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data() + 4, header, 20), 0);
  const std::uint8_t one_and_half[4] = {0x00, 0x00, 0xC0, 0x3F};
  EXPECT_EQ(std::memcmp(bytes.data() + 24, one_and_half, 4), 0);
}

TEST(Skl1, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (int c : {2, 3}) {
    SkeletonSequence s = random_sequence(rng, 2, 5, 17, c, 1e3);
    s.data[3] = -0.0f;
    s.data[4] = 1e-40f;  // subnormal
    const SkeletonSequence back = decode_skl1(encode_skl1(s));
    EXPECT_FALSE(back.label.has_value());
    ASSERT_EQ(back.data.size(), s.data.size());
    EXPECT_EQ(std::memcmp(back.data.data(), s.data.data(), s.data.size() * 4), 0);
    EXPECT_TRUE(back.same_shape(s));
  }
}

TEST(Skl1, MalformedInputsAreFormatErrors) {
  SkeletonSequence s = SkeletonSequence::zeros(1, 2, 3, 2);
  auto bytes = encode_skl1(s);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_skl1(bad_magic), FormatError);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_skl1(truncated), FormatError);

  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(decode_skl1(trailing), FormatError);

  EXPECT_THROW(decode_skl1(std::vector<std::uint8_t>{}), FormatError);
  EXPECT_THROW(decode_skl1(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10)), FormatError);

  // Extents whose product overflows 64 bits must not pass the size check.
  auto huge = bytes;
  for (int i = 4; i < 20; ++i) huge[i] = 0xFF;
  for (int f = 0; f < 4; ++f) huge[4 + 4 * f + 3] = 0x7F;
  EXPECT_THROW(decode_skl1(huge), FormatError);
}

TEST(Skl1, FileRoundTrip) {
  const auto dir = scratch("skl1");
  std::mt19937_64 rng(2);
  SkeletonSequence s = random_sequence(rng, 2, 4, 17, 3);
  s.label = 3;
  const std::string path = (dir / "a.skl1").string();
  write_skl1(path, s);
  const SkeletonSequence back = load_precomputed_3d(path);
  EXPECT_EQ(back.data, s.data);
  EXPECT_EQ(back.label, 3);
  EXPECT_THROW(read_skl1((dir / "missing.skl1").string()), IoError);
}

TEST(PrecomputedLift, RejectsWrongChannelsAndEmptyFiles) {
  const auto dir = scratch("lift");
  write_skl1((dir / "two.skl1").string(), SkeletonSequence::zeros(1, 2, 3, 2));
  EXPECT_THROW(load_precomputed_3d((dir / "two.skl1").string()), FormatError);
  std::ofstream((dir / "empty.skl1").string()).close();
  EXPECT_THROW(load_precomputed_3d((dir / "empty.skl1").string()), FormatError);
}

TEST(DatasetIo, RoundTrip) {
  const auto dir = scratch("dataset");
  SynthConfig cfg;
  cfg.samples_per_class = 3;
  cfg.frames = 8;
  const Topology topo = coco();
  const Dataset train = generate_synthetic(cfg, topo, Split::Train);
  const Dataset val = generate_synthetic(cfg, topo, Split::Val);
  write_dataset(dir.string(), {&train, &val}, topo.name);
  const Dataset back = read_dataset(dir.string(), Split::Val);
  ASSERT_EQ(back.size(), val.size());
  EXPECT_EQ(back.num_classes, val.num_classes);
  for (std::size_t i = 0; i < val.size(); ++i) {
    EXPECT_EQ(back.sequences[i].sample_id, val.sequences[i].sample_id);
    EXPECT_EQ(back.sequences[i].label, val.sequences[i].label);
    EXPECT_EQ(back.sequences[i].data, val.sequences[i].data);
  }
  EXPECT_THROW(read_dataset(dir.string(), Split::Test), ArgumentError);
  EXPECT_THROW(read_dataset((dir / "nope").string(), Split::Train), IoError);
}

TEST(DatasetIo, RejectsPathLikeIds) {
  Dataset ds;
  ds.num_classes = 2;
  SkeletonSequence s = SkeletonSequence::zeros(1, 2, 3, 2);
  s.label = 0;
  s.sample_id = "../escape";
  ds.sequences.push_back(s);
  EXPECT_THROW(write_dataset(scratch("ids").string(), {&ds}, "x"), ArgumentError);
}

TEST(KeyValue, ParsesAndRejects) {
  const auto doc = KeyValueDoc::parse("# comment\nbase_lr = 0.5  # trailing\n\nmilestones = 3, 7\nname = x y\n");
  EXPECT_DOUBLE_EQ(doc.get_double("base_lr"), 0.5);
  EXPECT_EQ(doc.get_int_list("milestones"), (std::vector<long long>{3, 7}));
  EXPECT_EQ(doc.get_string("name"), "x y");
  EXPECT_THROW(doc.get_int("name"), ConfigError);
  EXPECT_THROW(doc.get_string("absent"), ConfigError);
  EXPECT_THROW(KeyValueDoc::parse("a = 1\na = 2\n"), FormatError);
  EXPECT_THROW(KeyValueDoc::parse("just text\n"), FormatError);
}

TEST(TrainConfigDoc, RoundTripsEveryField) {
  TrainConfig c = full_scale_gcn_config();
  c.seed = 99;
  c.grad_clip = 2.5;
  c.momentum = 0.5;
  const TrainConfig back = train_config_from(KeyValueDoc::parse(to_key_values(c)));
  EXPECT_EQ(back.base_lr, c.base_lr);
  EXPECT_EQ(back.decay_factor, c.decay_factor);
  EXPECT_EQ(back.milestones, c.milestones);
  EXPECT_EQ(back.epochs, c.epochs);
  EXPECT_EQ(back.batch_size, c.batch_size);
  EXPECT_EQ(back.momentum, c.momentum);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.weight_decay, c.weight_decay);
  EXPECT_EQ(back.grad_clip, c.grad_clip);
}

TEST(TrainConfigDoc, RejectsInvalidValues) {
  EXPECT_THROW(train_config_from(KeyValueDoc::parse("milestones = 5, 3\nepochs = 10\n")), ConfigError);
  EXPECT_THROW(train_config_from(KeyValueDoc::parse("milestones = 12\nepochs = 10\n")), ConfigError);
  EXPECT_THROW(train_config_from(KeyValueDoc::parse("decay_factor = 1.5\n")), ConfigError);
  EXPECT_THROW(train_config_from(KeyValueDoc::parse("momentum = 1\n")), ConfigError);
  EXPECT_THROW(train_config_from(KeyValueDoc::parse("epochs = 0\n")), ConfigError);
  EXPECT_THROW(run_config_from(KeyValueDoc::parse("learning_rate = 0.1\n"), BackboneKind::Former), ConfigError);
}

TEST(RunConfig, ArchKeys) {
  const auto doc = KeyValueDoc::parse("gcn.channels = 8, 16\ngcn.temporal_kernel = 3\nmodel_seed = 4\n");
  const RunConfig rc = run_config_from(doc, BackboneKind::GcnTemporalDependent);
  EXPECT_EQ(rc.gcn.channels, (std::vector<int>{8, 16}));
  EXPECT_EQ(rc.gcn.temporal_kernel, 3);
  EXPECT_EQ(rc.model_seed, 4u);
  EXPECT_EQ(rc.gcn.mode, AdjacencyMode::TemporalDependent);
}

class CheckpointTest : public ::testing::TestWithParam<BackboneKind> {};

TEST_P(CheckpointTest, RoundTripPreservesLogits) {
  const auto dir = scratch("ckpt_" + std::string(to_string(GetParam())));
  const Topology topo = coco();
  RunConfig rc = default_run_config(GetParam());
  rc.gcn.channels = {4, 6};
  rc.former.model_dim = 8;
  rc.former.ff_dim = 8;
  rc.former.blocks = 1;
  rc.model_seed = 12;
  Backbone b = Backbone::create(GetParam(), topo, 3, 4, rc);
  b.set_modality(Modality::BM);
  // Nudge every parameter so zero-initialised ones are exercised too.
  std::mt19937_64 rng(5);
  for (const auto& p : b.parameters()) p.param->value += random_matrix(p.param->value.rows(), p.param->value.cols(), rng, 0.1);

  SynthConfig sc;
  sc.samples_per_class = 1;
  sc.frames = 8;
  Dataset ds = generate_synthetic(sc, topo, Split::Val);
  for (auto& s : ds.sequences) s = lift_to_3d(s, zero_z_lifter());

  const std::string path = (dir / "model.json").string();
  save_checkpoint(path, b);
  const Backbone back = load_checkpoint(path, 17, 4);
  EXPECT_EQ(back.kind(), GetParam());
  EXPECT_EQ(back.modality(), Modality::BM);
  EXPECT_EQ(back.predict(ds), b.predict(ds));

  EXPECT_THROW(load_checkpoint(path, 18, 4), DimensionError);
  EXPECT_THROW(load_checkpoint(path, 17, 5), DimensionError);
}

INSTANTIATE_TEST_SUITE_P(AllBackbones, CheckpointTest,
                         ::testing::Values(BackboneKind::GcnStatic, BackboneKind::GcnChannelRefined,
                                           BackboneKind::GcnTemporalDependent, BackboneKind::Former),
                         [](const auto& info) {
                           std::string n(to_string(info.param));
                           std::replace(n.begin(), n.end(), '-', '_');
                           return n;
                         });

TEST(Checkpoint, MalformedArchives) {
  const auto dir = scratch("ckpt_bad");
  const std::string path = (dir / "bad.json").string();
  std::ofstream(path) << "{\"format_version\": 1}";
  EXPECT_THROW(load_checkpoint(path), FormatError);
  std::ofstream(path) << "{not json";
  EXPECT_THROW(load_checkpoint(path), FormatError);
  std::ofstream(path) << "{\"format_version\": 9}";
  EXPECT_THROW(load_checkpoint(path), FormatError);
  EXPECT_THROW(load_checkpoint((dir / "missing.json").string()), IoError);
}
