#pragma once

#include <cstddef>
#include <vector>

#include "hybridloss/losses.hpp"

namespace hybridloss {

using Labeling = std::vector<int>;

/// Per-position label scores plus a shared transition score matrix for a
/// length-L chain with c labels per position. Total score of a labeling
/// y is sum_j unary(j, y_j) + sum_j transition(y_j, y_{j+1}).
struct ChainPotentials {
  std::size_t length = 0;
  std::size_t num_labels = 0;
  std::vector<double> unary;       // length x num_labels, row-major
  std::vector<double> transition;  // num_labels x num_labels, row-major

  ChainPotentials() = default;
  ChainPotentials(std::size_t len, std::size_t c);

  double& unary_at(std::size_t j, int s) { return unary[j * num_labels + s]; }
  double unary_at(std::size_t j, int s) const { return unary[j * num_labels + s]; }
  double& trans_at(int s, int t) { return transition[s * num_labels + t]; }
  double trans_at(int s, int t) const { return transition[s * num_labels + t]; }

  double labeling_score(const Labeling& y) const;
};

/// One training sequence: per-position observation features and the gold
/// label sequence.
struct ChainInstance {
  std::vector<SparseFeatureVector> unary_features;
  Labeling gold_labels;

  std::size_t length() const { return gold_labels.size(); }
};

/// Linear chain scorer f_y(x; w) = <w, phi(x, y)>. Weight layout: the
/// first num_unary_features * num_labels entries are unary weights
/// grouped by label (slice s covers the unary feature space), followed
/// by num_labels^2 transition weights in row-major (from, to) order.
struct ChainModel {
  std::size_t num_labels = 0;
  std::size_t num_unary_features = 0;
  WeightVector weights;

  ChainModel() = default;
  ChainModel(std::size_t c, std::size_t n_unary);
  ChainModel(std::size_t c, std::size_t n_unary, WeightVector w);

  std::size_t dim() const { return num_unary_features * num_labels + num_labels * num_labels; }
  std::size_t unary_index(int label, std::uint32_t feature) const {
    return static_cast<std::size_t>(label) * num_unary_features + feature;
  }
  std::size_t transition_index(int from, int to) const {
    return num_unary_features * num_labels + static_cast<std::size_t>(from) * num_labels + to;
  }
};

ChainPotentials build_potentials(const ChainModel& model, const ChainInstance& inst);

/// phi(x, y), dense in the model's weight layout.
std::vector<double> feature_map(const ChainModel& model, const ChainInstance& inst,
                                const Labeling& y);

/// Maximum-score labeling. Ties broken by preferring the lowest label id
/// at each backtracking step.
Labeling viterbi(const ChainPotentials& pot);

/// log sum over all labelings of exp(total score), by the forward
/// recursion in log space.
double log_partition(const ChainPotentials& pot);

/// Node and edge marginals of p(y) proportional to exp(total score).
struct ChainMarginals {
  std::size_t length = 0;
  std::size_t num_labels = 0;
  std::vector<double> node;  // length x c
  std::vector<double> edge;  // (length-1) x c x c
  double log_z = 0.0;

  double node_at(std::size_t j, int s) const { return node[j * num_labels + s]; }
  double edge_at(std::size_t j, int s, int t) const {
    return edge[(j * num_labels + s) * num_labels + t];
  }
};

ChainMarginals marginals(const ChainPotentials& pot);

/// Normalized Hamming distance: fraction of positions that differ.
double hamming(const Labeling& a, const Labeling& b);

/// argmax_y (score(y) + hamming(y, gold)): Viterbi after adding 1/L to
/// every non-gold unary entry.
Labeling loss_augmented_decode(const ChainPotentials& pot, const Labeling& gold);

/// Margin-rescaled structured hinge with Hamming label cost.
double structured_hinge(const ChainModel& model, const ChainInstance& inst);

/// -score(gold) + log_partition.
double structured_log_loss(const ChainModel& model, const ChainInstance& inst);

/// alpha * structured_log_loss + (1 - alpha) * structured_hinge.
double structured_hybrid(const ChainModel& model, const ChainInstance& inst, HybridParam a);

/// E_{p(y|x;w)}[phi(x, y)] - phi(x, gold), assembled from node and edge
/// marginals.
std::vector<double> grad_structured_log(const ChainModel& model, const ChainInstance& inst);

/// phi(x, y-dagger) - phi(x, gold) when the hinge is active, else the
/// zero vector (same kink convention as the multiclass losses).
std::vector<double> subgrad_structured_hinge(const ChainModel& model, const ChainInstance& inst);

/// Convex combination of the two (sub)gradients above.
std::vector<double> subgrad_structured_hybrid(const ChainModel& model, const ChainInstance& inst,
                                              HybridParam a);

}  // namespace hybridloss
