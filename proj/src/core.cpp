#include "hybridloss/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybridloss {

LabelDistribution::LabelDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw std::invalid_argument("label distribution needs at least 2 labels");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument("label distribution entries must be finite and >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("label distribution must sum to 1");
  }
}

SparseFeatureVector::SparseFeatureVector(std::vector<FeatureEntry> e) : entries(std::move(e)) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(entries[i].value) || entries[i].value == 0.0) {
      throw std::invalid_argument("sparse feature values must be finite and nonzero");
    }
    if (i > 0 && entries[i].id <= entries[i - 1].id) {
      throw std::invalid_argument("sparse feature ids must be strictly increasing");
    }
  }
}

int argmax_with_tiebreak(const ScoreVector& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("argmax of an empty score vector");
  }
  int best = 0;
  for (int y = 1; y < static_cast<int>(scores.size()); ++y) {
    if (scores[y] > scores[best]) best = y;
  }
  return best;
}

double log_sum_exp(const std::vector<double>& v) {
  double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

LabelDistribution softmax(const ScoreVector& scores) {
  double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double sum = 0.0;
  for (std::size_t y = 0; y < scores.size(); ++y) {
    p[y] = std::exp(scores[y] - m);
    sum += p[y];
  }
  for (double& v : p) v /= sum;
  return LabelDistribution(std::move(p));
}

double margin(const ScoreVector& scores, int y) {
  if (scores.size() < 2) {
    throw std::invalid_argument("margin needs at least 2 labels");
  }
  if (y < 0 || y >= static_cast<int>(scores.size())) {
    throw std::out_of_range("label id " + std::to_string(y) + " out of range");
  }
  double best_other = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < static_cast<int>(scores.size()); ++v) {
    if (v != y) best_other = std::max(best_other, scores[v]);
  }
  return scores[y] - best_other;
}

double dot(const WeightVector& w, const SparseFeatureVector& phi) {
  double sum = 0.0;
  for (const FeatureEntry& e : phi.entries) {
    if (e.id >= w.size()) {
      throw std::out_of_range("feature id " + std::to_string(e.id) +
                              " exceeds weight dimension " + std::to_string(w.size()));
    }
    sum += w[e.id] * e.value;
  }
  return sum;
}

}  // namespace hybridloss
