#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hdbn/config.hpp"
#include "hdbn/error.hpp"
#include "hdbn/nn.hpp"
#include "hdbn/skeleton.hpp"

namespace hdbn {

struct TrainConfig {
  double base_lr = 0.1;
  double decay_factor = 0.1;
  std::vector<int> milestones;
  int epochs = 1;
  int batch_size = 16;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double weight_decay = 4e-4;
  double grad_clip = 0.0;  // max global gradient L2 norm, 0 disables
};

inline void validate(const TrainConfig& c) {
  if (!(c.base_lr >= 0.0) || !std::isfinite(c.base_lr)) throw ConfigError("base_lr must be a finite non-negative number");
  if (!(c.decay_factor > 0.0 && c.decay_factor < 1.0)) throw ConfigError("decay_factor must lie in (0, 1)");
  if (c.epochs < 1) throw ConfigError("epochs must be positive");
  if (c.batch_size < 1) throw ConfigError("batch_size must be positive");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(c.weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(c.grad_clip >= 0.0) || !std::isfinite(c.grad_clip)) throw ConfigError("grad_clip must be finite and non-negative");
  for (std::size_t i = 0; i < c.milestones.size(); ++i) {
    if (c.milestones[i] < 0 || c.milestones[i] >= c.epochs) throw ConfigError("milestone outside [0, epochs)");
    if (i > 0 && c.milestones[i] <= c.milestones[i - 1]) throw ConfigError("milestones must be strictly increasing");
  }
}

// GCN schedule: SGD, 65 epochs, batch 64, lr 0.1 decayed x0.1 at 35 and 55.
inline TrainConfig full_scale_gcn_config() {
  TrainConfig c;
  c.base_lr = 0.1;
  c.decay_factor = 0.1;
  c.milestones = {35, 55};
  c.epochs = 65;
  c.batch_size = 64;
  return c;
}

// Attention schedule: SGD, 90 epochs, batch 128, constant lr 0.02.
inline TrainConfig full_scale_former_config() {
  TrainConfig c;
  c.base_lr = 0.02;
  c.milestones = {};
  c.epochs = 90;
  c.batch_size = 128;
  return c;
}

// Reads every TrainConfig key present in `doc`; absent keys keep `base`.
inline TrainConfig train_config_from(const KeyValueDoc& doc, TrainConfig base = {}) {
  if (doc.has("base_lr")) base.base_lr = doc.get_double("base_lr");
  if (doc.has("decay_factor")) base.decay_factor = doc.get_double("decay_factor");
  if (doc.has("milestones")) {
    base.milestones.clear();
    for (long long m : doc.get_int_list("milestones")) base.milestones.push_back(static_cast<int>(m));
  }
  if (doc.has("epochs")) base.epochs = static_cast<int>(doc.get_int("epochs"));
  if (doc.has("batch_size")) base.batch_size = static_cast<int>(doc.get_int("batch_size"));
  if (doc.has("momentum")) base.momentum = doc.get_double("momentum");
  if (doc.has("seed")) base.seed = static_cast<std::uint64_t>(doc.get_int("seed"));
  if (doc.has("weight_decay")) base.weight_decay = doc.get_double("weight_decay");
  if (doc.has("grad_clip")) base.grad_clip = doc.get_double("grad_clip");
  validate(base);
  return base;
}

inline std::string to_key_values(const TrainConfig& c) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "base_lr = " << c.base_lr << "\n";
  out << "decay_factor = " << c.decay_factor << "\n";
  out << "milestones = ";
  for (std::size_t i = 0; i < c.milestones.size(); ++i) out << (i ? "," : "") << c.milestones[i];
  out << "\n";
  out << "epochs = " << c.epochs << "\n";
  out << "batch_size = " << c.batch_size << "\n";
  out << "momentum = " << c.momentum << "\n";
  out << "seed = " << c.seed << "\n";
  out << "weight_decay = " << c.weight_decay << "\n";
  out << "grad_clip = " << c.grad_clip << "\n";
  return out.str();
}

// base_lr * decay_factor^(number of milestones <= epoch)
inline double lr_at_epoch(const TrainConfig& c, int epoch) {
  int passed = 0;
  for (int m : c.milestones) {
    if (m <= epoch) ++passed;
  }
  double lr = c.base_lr;
  for (int i = 0; i < passed; ++i) lr *= c.decay_factor;
  return lr;
}

struct LossResult {
  double loss = 0.0;
  Mat grad;  // dL/dlogits, same shape as the logits
};

// Batch-mean cross entropy through a max-shifted log-sum-exp.
inline LossResult cross_entropy_loss(const Mat& logits, const std::vector<int>& labels) {
  const Eigen::Index b = logits.rows();
  const Eigen::Index k = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != b) throw DimensionError("label count does not match logits rows");
  if (b == 0) throw ArgumentError("cross entropy of an empty batch");
  LossResult out{0.0, Mat(b, k)};
  for (Eigen::Index i = 0; i < b; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= k) throw ArgumentError("label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
    const double mx = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) sum += std::exp(logits(i, c) - mx);
    const double lse = mx + std::log(sum);
    out.loss += lse - logits(i, y);
    for (Eigen::Index c = 0; c < k; ++c) out.grad(i, c) = std::exp(logits(i, c) - lse);
    out.grad(i, y) -= 1.0;
  }
  out.loss /= static_cast<double>(b);
  out.grad /= static_cast<double>(b);
  return out;
}

// v <- momentum * v + grad + weight_decay * param;  param <- param - lr * v
inline void sgd_step(Mat& param, const Mat& grad, Mat& velocity, double lr, double momentum, double weight_decay) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols() || param.rows() != velocity.rows() ||
      param.cols() != velocity.cols()) {
    throw DimensionError("sgd_step shape mismatch");
  }
  velocity = momentum * velocity + grad + weight_decay * param;
  param -= lr * velocity;
}

inline void sgd_step(const ParamList& params, double lr, double momentum, double weight_decay) {
  for (const auto& p : params) sgd_step(p.param->value, p.param->grad, p.param->velocity, lr, momentum, weight_decay);
}

inline double gradient_norm(const ParamList& params) {
  double sq = 0.0;
  for (const auto& p : params) sq += p.param->grad.squaredNorm();
  return std::sqrt(sq);
}

// Rescales all gradients together so their global L2 norm is at most
// max_norm. Returns the norm before clipping.
inline double clip_gradients(const ParamList& params, double max_norm) {
  const double norm = gradient_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& p : params) p.param->grad *= scale;
  }
  return norm;
}

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

inline std::string history_csv(const TrainHistory& h) {
  std::ostringstream out;
  out << "epoch,lr,train_loss,train_acc,val_acc\n" << std::setprecision(17);
  for (const auto& e : h.epochs) {
    out << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.train_acc << ',' << e.val_acc << '\n';
  }
  return out.str();
}

inline std::vector<int> labels_of(const Dataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const auto& s = ds.sequences.at(i);
    if (!s.label) throw ArgumentError("sample '" + s.sample_id + "' has no label");
    out.push_back(*s.label);
  }
  return out;
}

// Fisher-Yates with a portable index draw.
inline void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

template <class Model>
concept Classifier = requires(Model m, const Model& cm, const SequenceBatch& batch, typename Model::Cache cache,
                              const Mat& dlogits) {
  { cm.forward(batch, &cache) } -> std::same_as<Mat>;
  { cm.forward(batch) } -> std::same_as<Mat>;
  m.backward(cache, dlogits);
  { m.parameters() } -> std::same_as<ParamList>;
};

// Logits for every sample of `ds`, in dataset order.
template <Classifier Model>
Mat predict_logits(const Model& model, const Dataset& ds, int batch_size = 32) {
  if (ds.empty()) throw ArgumentError("cannot predict on an empty dataset");
  Mat out;
  for (std::size_t start = 0; start < ds.size(); start += static_cast<std::size_t>(batch_size)) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(ds.size(), start + batch_size); ++i) idx.push_back(i);
    const Mat logits = model.forward(pack_batch(ds, idx));
    if (out.size() == 0) out.resize(static_cast<Eigen::Index>(ds.size()), logits.cols());
    out.middleRows(static_cast<Eigen::Index>(start), logits.rows()) = logits;
  }
  return out;
}

inline double top1_accuracy(const Mat& logits, const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (argmax_row(logits, static_cast<Eigen::Index>(i)) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

template <Classifier Model>
double dataset_accuracy(const Model& model, const Dataset& ds, int batch_size = 32) {
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return top1_accuracy(predict_logits(model, ds, batch_size), labels_of(ds, idx));
}

struct TrainHooks {
  // Called after an epoch whose validation accuracy beats every earlier one.
  std::function<void(int epoch, double val_acc)> on_best_val;
  // Called after every epoch; return false to stop early.
  std::function<bool(const EpochRecord&)> on_epoch;
};

// Single-writer SGD loop. The shuffle order depends only on config.seed,
// so two runs from the same initial model give identical histories.
template <Classifier Model>
TrainHistory train_model(Model& model, const Dataset& train, const Dataset* val, const TrainConfig& config,
                         const TrainHooks& hooks = {}) {
  validate(config);
  if (train.empty()) throw ArgumentError("training set is empty");
  if (train.split != Split::Train) throw ArgumentError("train_model expects a train split");

  const ParamList params = model.parameters();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainHistory history;
  double best_val = -1.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(config, epoch);
    shuffle_indices(order, rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
      const std::vector<int> labels = labels_of(train, idx);
      const SequenceBatch batch = pack_batch(train, idx);

      typename Model::Cache cache;
      zero_grads(params);
      const Mat logits = model.forward(batch, &cache);
      const LossResult loss = cross_entropy_loss(logits, labels);
      if (!std::isfinite(loss.loss)) {
        throw Error("non-finite training loss at epoch " + std::to_string(epoch));
      }
      model.backward(cache, loss.grad);
      if (!std::isfinite(clip_gradients(params, config.grad_clip))) {
        throw Error("non-finite gradient at epoch " + std::to_string(epoch));
      }
      sgd_step(params, lr, config.momentum, config.weight_decay);

      loss_sum += loss.loss * static_cast<double>(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (argmax_row(logits, static_cast<Eigen::Index>(i)) == labels[i]) ++correct;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(train.size());
    rec.val_acc = (val && !val->empty()) ? dataset_accuracy(model, *val, config.batch_size) : 0.0;
    history.epochs.push_back(rec);

    if (val && !val->empty() && rec.val_acc > best_val) {
      best_val = rec.val_acc;
      if (hooks.on_best_val) hooks.on_best_val(epoch, rec.val_acc);
    }
    if (hooks.on_epoch && !hooks.on_epoch(rec)) break;
  }
  return history;
}

struct GradientCheckReport {
  double max_relative_error = 0.0;
  int probes = 0;
  int skipped = 0;  // draws discarded because x +- step crossed a ReLU kink
  std::string worst_param;
};

// Central differences on randomly probed coordinates against the analytic
// gradients already stored in `params`. loss_fn re-evaluates the loss at
// the current parameter values. If pattern_fn is given it returns the ReLU
// sign pattern of the last loss_fn call, and draws whose two evaluations
// disagree are replaced by fresh ones (up to 50 x probe_count draws).
inline GradientCheckReport finite_difference_check(const std::function<double()>& loss_fn, const ParamList& params,
                                                   int probe_count, std::uint64_t seed = 0, double step = 1e-3,
                                                   const std::function<std::vector<bool>()>& pattern_fn = {}) {
  if (probe_count < 1) throw ArgumentError("probe_count must be at least 1");
  const std::size_t total = parameter_count(params);
  if (total == 0) throw ArgumentError("no parameters to probe");
  std::mt19937_64 rng(seed);
  GradientCheckReport report;
  const int max_draws = 50 * probe_count;
  for (int draw = 0; draw < max_draws && report.probes < probe_count; ++draw) {
    std::size_t flat = static_cast<std::size_t>(rng() % total);
    std::size_t which = 0;
    while (flat >= static_cast<std::size_t>(params[which].param->value.size())) {
      flat -= static_cast<std::size_t>(params[which].param->value.size());
      ++which;
    }
    Param& p = *params[which].param;
    double& x = p.value.data()[flat];
    const double analytic = p.grad.data()[flat];
    const double saved = x;
    x = saved + step;
    const double up = loss_fn();
    std::vector<bool> pattern_up;
    if (pattern_fn) pattern_up = pattern_fn();
    x = saved - step;
    const double down = loss_fn();
    const bool kinked = pattern_fn && pattern_fn() != pattern_up;
    x = saved;
    if (kinked) {
      ++report.skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_param = params[which].name;
    }
    ++report.probes;
  }
  return report;
}

// Fills analytic gradients for one batch and probes them, skipping probes
// that straddle a ReLU kink.
template <Classifier Model>
GradientCheckReport gradient_check(Model& model, const SequenceBatch& batch, const std::vector<int>& labels,
                                   int probe_count, std::uint64_t seed = 0, double step = 1e-3) {
  const ParamList params = model.parameters();
  zero_grads(params);
  typename Model::Cache cache;
  const Mat logits = model.forward(batch, &cache);
  model.backward(cache, cross_entropy_loss(logits, labels).grad);
  typename Model::Cache probe_cache;
  auto loss_fn = [&] { return cross_entropy_loss(model.forward(batch, &probe_cache), labels).loss; };
  auto pattern_fn = [&] { return activation_pattern(probe_cache); };
  return finite_difference_check(loss_fn, params, probe_count, seed, step, pattern_fn);
}

}  // namespace hdbn
