#pragma once

#include <optional>
#include <string>

#include "hybridloss/consistency.hpp"
#include "hybridloss/dataio.hpp"
#include "hybridloss/report.hpp"

namespace hybridloss {

struct Exp1Options {
  double alpha = 0.5;
  double lambda = 1e-4;
  int k_min = 3;
  int k_max = 10;
  int epochs = 200;
  std::uint64_t seed = 1;
};

/// Trains hinge, log, and hybrid(alpha) on the one-observation dataset
/// for each k and reports the weighted 0-1 error (train error equals
/// test error by construction). Columns: k, loss, alpha, error.
ExperimentReport run_exp1(const Exp1Options& opt);

struct Exp2Options {
  int epochs = 300;
  std::uint64_t seed = 7;
  std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<double> alpha_grid = {0.5, 0.7, 0.9, 0.95, 0.99, 1.0};
};

/// 60-dataset sweep over rho in {0.1..1.0} and m in {30, 60, 100, 300,
/// 600, 1000}. Hyperparameters are selected on the validation split;
/// test accuracies and pairwise win/loss counts are reported.
ExperimentReport run_exp2(const Exp2Options& opt);

struct ChunkOptions {
  std::string train_path;
  std::string test_path;
  std::string loss = "hybrid";  // hinge | log | hybrid
  std::optional<double> alpha;  // hybrid only; selected on a split if absent
  double lambda = 1e-2;
  int epochs = 30;
  int minibatch = 10;
  std::uint64_t seed = 1;
  std::string model_out;  // optional
};

ExperimentReport run_chunk(const ChunkOptions& opt);

struct DominanceOptions {
  std::string model_path;
  std::string corpus_path;
};

/// Per-sentence probabilities of the gold and the most likely labeling
/// under a trained chain model, each sorted ascending, plus the fraction
/// of sentences whose most likely labeling has probability below 1/2.
ExperimentReport run_dominance(const DominanceOptions& opt);

struct ConsistencyOptions {
  int k_max = 8;
  int trials = 500;
  std::uint64_t seed = 99;
  bool above_threshold_only = false;  // sample alpha above the bound
};

/// Canonical witness rows followed by random (D, alpha) trials; each row
/// carries the threshold, the prediction, and the observed alignment of
/// the risk minimizer. Sufficiency violations are counted in a summary
/// row and reported as an error if nonzero.
ExperimentReport run_consistency(const ConsistencyOptions& opt);

/// Samplers shared by the consistency lab and its tests. Distributions
/// are normalized exponentials; draws whose top-two gap is below 0.02
/// are rejected so alignment is numerically decidable.
LabelDistribution sample_distribution(int k, std::uint64_t& state);
double sample_alpha_above(const ConsistencyVerdict& verdict, std::uint64_t& state);

}  // namespace hybridloss
