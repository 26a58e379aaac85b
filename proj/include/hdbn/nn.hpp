#pragma once

// Dense building blocks shared by both branches: row-major matrices,
// named parameters with gradient slots, initialisers, row softmax and
// per-row feature normalisation with their backward passes.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hdbn/error.hpp"
#include "hdbn/skeleton.hpp"

namespace hdbn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

struct Param {
  Mat value;
  Mat grad;
  Mat velocity;  // optimiser state

  Param() = default;
  explicit Param(Mat v) : value(std::move(v)) { reset_state(); }
  Param(Eigen::Index rows, Eigen::Index cols) : value(Mat::Zero(rows, cols)) { reset_state(); }

  void reset_state() {
    grad = Mat::Zero(value.rows(), value.cols());
    velocity = Mat::Zero(value.rows(), value.cols());
  }
  void zero_grad() { grad.setZero(); }
};

struct NamedParam {
  std::string name;
  Param* param;
};
using ParamList = std::vector<NamedParam>;

inline void zero_grads(const ParamList& params) {
  for (const auto& p : params) p.param->zero_grad();
}

inline std::size_t parameter_count(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += static_cast<std::size_t>(p.param->value.size());
  return n;
}

// Portable uniform draw in [0, 1) from a 64-bit engine; the standard
// distributions are implementation-defined, this is not.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Box-Muller on uniform01, for the same reason.
inline double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Uniform He-style init: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
inline void he_uniform(Mat& m, int fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / std::max(1, fan_in));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -bound, bound);
}

inline Mat random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -scale, scale);
  return m;
}

inline void relu_inplace(Mat& m) { m = m.cwiseMax(0.0); }

// Row-wise softmax with max shift.
inline Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      out(r, c) = std::exp(logits(r, c) - mx);
      sum += out(r, c);
    }
    out.row(r) /= sum;
  }
  return out;
}

// dL/dlogits given the softmax output and dL/dprobs.
inline Mat softmax_rows_backward(const Mat& probs, const Mat& dprobs) {
  Mat out(probs.rows(), probs.cols());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    const double dot = probs.row(r).dot(dprobs.row(r));
    out.row(r) = probs.row(r).cwiseProduct((dprobs.row(r).array() - dot).matrix());
  }
  return out;
}

inline constexpr double kNormEpsilon = 1e-5;

// Per-row feature normalisation, then scale/shift by 1 x d gamma/beta.
struct RowNormCache {
  Mat normalized;  // (x - mean) / sqrt(var + eps)
  Eigen::VectorXd inv_std;
};

inline Mat row_norm_forward(const Mat& x, const Mat& gamma, const Mat& beta, RowNormCache* cache = nullptr) {
  const Eigen::Index d = x.cols();
  Mat xhat(x.rows(), d);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + kNormEpsilon);
    xhat.row(r) = (x.row(r).array() - mean) * inv_std[r];
  }
  Mat y = (xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

// Returns dL/dx and accumulates into dgamma / dbeta.
inline Mat row_norm_backward(const RowNormCache& cache, const Mat& gamma, const Mat& dy, Mat& dgamma, Mat& dbeta) {
  const Mat& xhat = cache.normalized;
  const double d = static_cast<double>(xhat.cols());
  dgamma.row(0) += dy.cwiseProduct(xhat).colwise().sum();
  dbeta.row(0) += dy.colwise().sum();
  Mat dxhat = dy.array().rowwise() * gamma.row(0).array();
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / d;
    const double mean_dx = dxhat.row(r).dot(xhat.row(r)) / d;
    dx.row(r) = cache.inv_std[r] * (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx);
  }
  return dx;
}

// A packed mini-batch of equally shaped sequences: rows are
// (sample, person, frame, joint) in that nesting order, columns channels.
struct SequenceBatch {
  int samples = 0;
  int persons = 0;
  int frames = 0;
  int joints = 0;
  int channels = 0;
  Mat values;
};

inline SequenceBatch pack_batch(const std::vector<const SkeletonSequence*>& seqs) {
  if (seqs.empty()) throw ArgumentError("cannot pack an empty batch");
  const SkeletonSequence& first = *seqs.front();
  SequenceBatch batch;
  batch.samples = static_cast<int>(seqs.size());
  batch.persons = first.persons;
  batch.frames = first.frames;
  batch.joints = first.joints;
  batch.channels = first.channels;
  const Eigen::Index rows_per = static_cast<Eigen::Index>(first.persons) * first.frames * first.joints;
  batch.values.resize(rows_per * batch.samples, first.channels);
  for (int n = 0; n < batch.samples; ++n) {
    const SkeletonSequence& s = *seqs[n];
    if (!s.same_shape(first)) throw DimensionError("batch mixes sequence shapes ('" + s.sample_id + "')");
    for (Eigen::Index i = 0; i < rows_per * first.channels; ++i) {
      batch.values.data()[n * rows_per * first.channels + i] = static_cast<double>(s.data[i]);
    }
  }
  return batch;
}

inline SequenceBatch pack_batch(const Dataset& ds, const std::vector<std::size_t>& indices) {
  std::vector<const SkeletonSequence*> seqs;
  seqs.reserve(indices.size());
  for (std::size_t i : indices) seqs.push_back(&ds.sequences.at(i));
  return pack_batch(seqs);
}

// Lowest index wins ties.
inline int argmax_row(const Mat& m, Eigen::Index r) {
  int best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(r, c) > m(r, best)) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace hdbn
