#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdbn/hdbn.hpp"

namespace fs = std::filesystem;
using namespace hdbn;

namespace {

struct Common {
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string topology = std::string(HDBN_DATA_DIR) + "/coco17.json";
};

void add_common(CLI::App* cmd, Common& c, bool want_config) {
  cmd->add_option("--out", c.out, "Output path")->required();
  cmd->add_option("--seed", c.seed, "Random seed");
  if (want_config) cmd->add_option("--config", c.config, "Config file");
  cmd->add_option("--topology", c.topology, "Topology file")->capture_default_str();
}

void say(const std::string& line) { std::cerr << line << std::endl; }

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(detail::trim(item));
  return out;
}

RunConfig load_run_config(const Common& c, BackboneKind kind) {
  RunConfig rc = c.config.empty() ? default_run_config(kind) : run_config_from(KeyValueDoc::load(c.config), kind);
  if (c.seed) {
    rc.train.seed = *c.seed;
    rc.model_seed = *c.seed;
  }
  return rc;
}

Dataset stream_split(const std::string& data_dir, Split split, const Topology& topo, Modality m, int dims) {
  return prepare_stream_data(read_dataset(data_dir, split), topo, m, dims);
}

std::string percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid dual-branch skeleton action recognition toolkit", "hdbn"};
  app.require_subcommand(1);

  // derive
  Common derive_c;
  std::string derive_in, derive_mod;
  auto* derive = app.add_subcommand("derive", "Derive a modality from a joint SKL1 file");
  derive->add_option("input", derive_in, "Input SKL1 file (raw joints)")->required();
  derive->add_option("--modality", derive_mod, "J, B, JM, BM, K2 or K2M")->required();
  add_common(derive, derive_c, false);

  // lift
  Common lift_c;
  std::string lift_in, lift_pre;
  auto* lift = app.add_subcommand("lift", "Lift a 2D SKL1 file to 3D");
  lift->add_option("input", lift_in, "Input 2D SKL1 file")->required();
  lift->add_option("--precomputed", lift_pre, "Use this 3D SKL1 file instead of the zero-depth stub");
  add_common(lift, lift_c, false);

  // gen-synth
  Common synth_c;
  SynthConfig synth_cfg;
  auto* synth = app.add_subcommand("gen-synth", "Generate a synthetic train/val dataset directory");
  synth->add_option("--classes", synth_cfg.num_classes)->capture_default_str();
  synth->add_option("--per-class", synth_cfg.samples_per_class)->capture_default_str();
  synth->add_option("--frames", synth_cfg.frames)->capture_default_str();
  synth->add_option("--persons", synth_cfg.persons)->capture_default_str();
  synth->add_option("--noise", synth_cfg.noise_std)->capture_default_str();
  add_common(synth, synth_c, false);

  // train
  Common train_c;
  std::string train_data, train_backbone = "gcn-ctr", train_mod = "J";
  int train_dims = 2;
  auto* train = app.add_subcommand("train", "Train one backbone on one modality stream");
  train->add_option("--data", train_data, "Dataset directory")->required();
  train->add_option("--backbone", train_backbone, "gcn-static, gcn-ctr, gcn-td or former")->capture_default_str();
  train->add_option("--modality", train_mod)->capture_default_str();
  train->add_option("--dims", train_dims)->check(CLI::IsMember({2, 3}))->capture_default_str();
  add_common(train, train_c, true);

  // eval
  Common eval_c;
  std::string eval_data, eval_model, eval_split = "val", eval_confusion;
  auto* eval = app.add_subcommand("eval", "Score a split with a checkpoint and write a score CSV");
  eval->add_option("--data", eval_data, "Dataset directory")->required();
  eval->add_option("--model", eval_model, "Checkpoint file")->required();
  eval->add_option("--split", eval_split)->capture_default_str();
  eval->add_option("--confusion", eval_confusion, "Also write the confusion matrix as CSV");
  add_common(eval, eval_c, false);

  // fuse
  Common fuse_c;
  std::vector<std::string> fuse_scores_in;
  std::string fuse_data, fuse_split = "val", fuse_weights;
  double fuse_step = 0.1;
  bool fuse_probs = false;
  auto* fuse = app.add_subcommand("fuse", "Fuse score CSVs with fixed or grid-searched weights");
  fuse->add_option("scores", fuse_scores_in, "Score CSV files")->required();
  fuse->add_option("--weights", fuse_weights, "Comma-separated weights; omit to grid-search on labels");
  fuse->add_option("--data", fuse_data, "Dataset directory supplying labels");
  fuse->add_option("--split", fuse_split)->capture_default_str();
  fuse->add_option("--grid-step", fuse_step)->capture_default_str();
  fuse->add_flag("--probabilities", fuse_probs, "Fuse per-stream softmax outputs instead of logits");
  add_common(fuse, fuse_c, false);

  // ablate
  Common ablate_c;
  std::string ablate_data;
  auto* ablate = app.add_subcommand("ablate", "Run a modality ablation from a JSON spec");
  ablate->add_option("--data", ablate_data, "Dataset directory")->required();
  add_common(ablate, ablate_c, true);
  ablate->get_option("--config")->required();

  // plot-confusion
  Common plot_c;
  std::string plot_scores, plot_data, plot_split = "val";
  auto* plot = app.add_subcommand("plot-confusion", "Render a confusion heatmap (PPM) for a score CSV");
  plot->add_option("scores", plot_scores, "Score CSV")->required();
  plot->add_option("--data", plot_data, "Dataset directory supplying labels")->required();
  plot->add_option("--split", plot_split)->capture_default_str();
  add_common(plot, plot_c, false);

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "hdbn: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*derive) {
      const Topology topo = load_topology(derive_c.topology);
      const SkeletonSequence joints = read_skl1(derive_in);
      ensure_parent(derive_c.out);
      write_skl1(derive_c.out, derive_modality(joints, topo, parse_modality(derive_mod)));
    } else if (*lift) {
      const SkeletonSequence seq = read_skl1(lift_in);
      const SkeletonSequence out = lift_pre.empty() ? lift_to_3d(seq, zero_z_lifter()) : load_precomputed_3d(lift_pre);
      if (!lift_pre.empty() && (out.persons != seq.persons || out.frames != seq.frames || out.joints != seq.joints)) {
        throw DimensionError("precomputed 3D file does not match the input's M, T, V");
      }
      ensure_parent(lift_c.out);
      write_skl1(lift_c.out, out);
    } else if (*synth) {
      if (synth_c.seed) synth_cfg.seed = *synth_c.seed;
      const Topology topo = load_topology(synth_c.topology);
      const Dataset tr = generate_synthetic(synth_cfg, topo, Split::Train);
      const Dataset va = generate_synthetic(synth_cfg, topo, Split::Val);
      write_dataset(synth_c.out, {&tr, &va}, topo.name);
      say("wrote " + std::to_string(tr.size()) + " train and " + std::to_string(va.size()) + " val samples to " +
          synth_c.out);
    } else if (*train) {
      const BackboneKind kind = parse_backbone(train_backbone);
      const Modality mod = parse_modality(train_mod);
      const Topology topo = load_topology(train_c.topology);
      const RunConfig rc = load_run_config(train_c, kind);
      const Dataset tr = stream_split(train_data, Split::Train, topo, mod, train_dims);
      const Dataset va = stream_split(train_data, Split::Val, topo, mod, train_dims);
      Backbone model = Backbone::create(kind, topo, train_dims, tr.num_classes, rc);
      model.set_modality(mod);
      TrainHooks hooks;
      hooks.on_epoch = [](const EpochRecord& r) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "epoch %3d  lr %.5g  loss %.4f  train %.4f  val %.4f", r.epoch, r.lr,
                      r.train_loss, r.train_acc, r.val_acc);
        say(buf);
        return true;
      };
      // --out always holds the best-validation weights; the final epoch goes to <stem>.last<ext>.
      ensure_parent(train_c.out);
      bool saved_best = false;
      hooks.on_best_val = [&](int, double) {
        save_checkpoint(train_c.out, model);
        saved_best = true;
      };
      const TrainHistory h = model.train(tr, &va, rc.train, hooks);
      fs::path last(train_c.out);
      last.replace_extension(".last" + fs::path(train_c.out).extension().string());
      save_checkpoint(last.string(), model);
      if (!saved_best) save_checkpoint(train_c.out, model);
      std::ofstream(fs::path(train_c.out).replace_extension(".history.csv")) << history_csv(h);
    } else if (*eval) {
      Backbone model = load_checkpoint(eval_model);
      const Topology& topo = model.topology();
      const Dataset ds = stream_split(eval_data, parse_split(eval_split), topo, model.modality(), model.in_channels());
      ScoreMatrix s;
      s.stream_name = fs::path(eval_c.out).stem().string();
      s.logits = model.predict(ds);
      for (const auto& seq : ds.sequences) s.sample_ids.push_back(seq.sample_id);
      ensure_parent(eval_c.out);
      write_scores(eval_c.out, s);
      const Metrics m = evaluate(s, label_map(ds));
      if (!eval_confusion.empty()) {
        ensure_parent(eval_confusion);
        std::ofstream(eval_confusion) << confusion_csv(m);
      }
      std::cout << "top-1 " << percent(m.top1) << std::endl;
    } else if (*fuse) {
      std::vector<ScoreMatrix> streams;
      for (const auto& p : fuse_scores_in) streams.push_back(read_scores(p));
      const FusionInput input = fuse_probs ? FusionInput::Probabilities : FusionInput::Logits;
      FusionWeights w;
      std::optional<LabelMap> labels;
      if (!fuse_data.empty()) labels = label_map(read_dataset(fuse_data, parse_split(fuse_split)));
      if (!fuse_weights.empty()) {
        for (const auto& item : split_commas(fuse_weights)) {
          try {
            w.weights.push_back(std::stod(item));
          } catch (const std::exception&) {
            throw ArgumentError("bad weight '" + item + "'");
          }
        }
      } else {
        if (!labels) throw ArgumentError("grid search needs --data for labels, or pass --weights");
        w = grid_search_weights(streams, *labels, fuse_step, input).weights;
      }
      const ScoreMatrix fused = fuse_scores(streams, w, input);
      ensure_parent(fuse_c.out);
      write_scores(fuse_c.out, fused);
      std::string ws;
      for (double x : w.weights) ws += (ws.empty() ? "" : ",") + std::to_string(x);
      std::cout << "weights " << ws;
      if (labels) std::cout << "  top-1 " << percent(evaluate(fused, *labels).top1);
      std::cout << std::endl;
    } else if (*ablate) {
      const AblationSpec spec = load_ablation_spec(ablate_c.config);
      const Topology topo = load_topology(ablate_c.topology);
      AblationOptions opt;
      opt.out_dir = ablate_c.out;
      opt.seed = ablate_c.seed;
      opt.log = say;
      const AblationReport r =
          run_ablation(spec, read_dataset(ablate_data, Split::Train), read_dataset(ablate_data, Split::Val), topo, opt);
      std::cout << r.markdown;
    } else if (*plot) {
      const ScoreMatrix s = read_scores(plot_scores);
      const Metrics m = evaluate(s, label_map(read_dataset(plot_data, parse_split(plot_split))));
      ensure_parent(plot_c.out);
      plot_confusion(m, plot_c.out);
      std::cout << "top-1 " << percent(m.top1) << std::endl;
    }
  } catch (const std::exception& e) {
    std::cerr << "hdbn: error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
