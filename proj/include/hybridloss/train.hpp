#pragma once

#include <cstdint>
#include <vector>

#include "hybridloss/chain.hpp"

namespace hybridloss {

/// One multiclass example under the shared-feature model
/// f_y(x; w) = <w_y, phi(x)> with per-label weight slices.
struct MulticlassExample {
  SparseFeatureVector features;
  int label = 0;
  double weight = 1.0;
};

struct MulticlassDataset {
  std::size_t num_labels = 0;
  std::size_t feature_dim = 0;
  std::vector<MulticlassExample> examples;
};

/// Scores of one example under weight layout w_y = w[y*d .. y*d+d).
ScoreVector multiclass_scores(const WeightVector& w, std::size_t num_labels,
                              std::size_t feature_dim, const SparseFeatureVector& phi);

enum class TrainMode { kBatch, kStochastic };

struct TrainConfig {
  double lambda = 1e-3;  // L2 weight, > 0
  double alpha = 1.0;    // hybrid mixing weight
  int epochs = 30;
  int minibatch = 10;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kBatch;
};

struct TrainReport {
  WeightVector final_weights;
  std::vector<double> objective_trace;  // one entry per epoch run
  int epochs_run = 0;
};

/// Minimizes the weight-averaged hybrid loss plus (lambda/2)||w||^2.
/// Batch mode is full-(sub)gradient descent with backtracking line
/// search; stochastic mode follows the 1/(lambda t) step schedule over
/// shuffled mini-batches. Weights start at zero; runs are deterministic
/// given the seed. Throws std::runtime_error on a non-finite objective.
TrainReport train_multiclass(const MulticlassDataset& data, const TrainConfig& cfg);

/// Same contract for chain models over the mean structured hybrid loss.
/// Mini-batch subgradients are summed in instance-index order.
TrainReport train_chain(const std::vector<ChainInstance>& data, std::size_t num_labels,
                        std::size_t num_unary_features, const TrainConfig& cfg);

/// Full regularized objectives, used for traces and tests.
double multiclass_objective(const MulticlassDataset& data, const WeightVector& w,
                            double lambda, HybridParam a);
double chain_objective(const std::vector<ChainInstance>& data, const ChainModel& model,
                       double lambda, HybridParam a);

/// Deterministic pseudo-random helpers shared by training and the data
/// generators so runs reproduce across platforms.
namespace rngutil {

/// Uniform double in [0, 1) from the top 53 bits of the generator.
double uniform01(std::uint64_t& state);

/// xorshift-style splitmix64 step; the single RNG primitive used here.
std::uint64_t next(std::uint64_t& state);

/// Uniform integer in [0, n) by rejection, n >= 1.
std::uint64_t uniform_below(std::uint64_t& state, std::uint64_t n);

/// Standard normal via the Marsaglia polar method.
double normal(std::uint64_t& state);

/// In-place Fisher-Yates shuffle driven by the state.
void shuffle(std::vector<std::size_t>& idx, std::uint64_t& state);

}  // namespace rngutil

}  // namespace hybridloss
