#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hybridloss {

/// One real score per label; index = label id.
using ScoreVector = std::vector<double>;

/// Dense parameter vector.
using WeightVector = std::vector<double>;

/// A probability vector over labels 0..k-1. Entries are nonnegative and
/// sum to 1 within 1e-9; k >= 2. The constructor validates.
class LabelDistribution {
 public:
  explicit LabelDistribution(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  double operator[](std::size_t y) const { return probs_[y]; }
  std::size_t size() const { return probs_.size(); }

 private:
  std::vector<double> probs_;
};

struct FeatureEntry {
  std::uint32_t id;
  double value;
};

/// Sparse feature vector in canonical form: ids strictly increasing,
/// values finite and nonzero.
struct SparseFeatureVector {
  std::vector<FeatureEntry> entries;

  SparseFeatureVector() = default;
  explicit SparseFeatureVector(std::vector<FeatureEntry> e);

  std::size_t nnz() const { return entries.size(); }
};

/// Smallest label id attaining the maximum score.
int argmax_with_tiebreak(const ScoreVector& scores);

/// log(sum_i exp(v_i)) with max-subtraction.
double log_sum_exp(const std::vector<double>& v);

/// p_y = exp(f_y) / sum_y' exp(f_y'), computed with max-subtraction.
LabelDistribution softmax(const ScoreVector& scores);

/// f_y - max_{y' != y} f_{y'}. Requires at least two labels.
double margin(const ScoreVector& scores, int y);

/// <w, phi>. Throws std::out_of_range if an id exceeds the weight dimension.
double dot(const WeightVector& w, const SparseFeatureVector& phi);

}  // namespace hybridloss
