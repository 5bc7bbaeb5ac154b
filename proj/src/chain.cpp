#include "hybridloss/chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridloss {

namespace {

void check_instance(const ChainModel& model, const ChainInstance& inst) {
  if (inst.unary_features.size() != inst.gold_labels.size()) {
    throw std::invalid_argument("feature rows and gold labels differ in length");
  }
  if (inst.gold_labels.empty()) {
    throw std::invalid_argument("empty chain instance");
  }
  for (int y : inst.gold_labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= model.num_labels) {
      throw std::invalid_argument("gold label out of range");
    }
  }
}

}  // namespace

ChainPotentials::ChainPotentials(std::size_t len, std::size_t c)
    : length(len),
      num_labels(c),
      unary(len * c, 0.0),
      transition(c * c, 0.0) {}

double ChainPotentials::labeling_score(const Labeling& y) const {
  if (y.size() != length) {
    throw std::invalid_argument("labeling length does not match potentials");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < length; ++j) s += unary_at(j, y[j]);
  for (std::size_t j = 0; j + 1 < length; ++j) s += trans_at(y[j], y[j + 1]);
  return s;
}

ChainModel::ChainModel(std::size_t c, std::size_t n_unary)
    : num_labels(c), num_unary_features(n_unary), weights(dim(), 0.0) {}

ChainModel::ChainModel(std::size_t c, std::size_t n_unary, WeightVector w)
    : num_labels(c), num_unary_features(n_unary), weights(std::move(w)) {
  if (weights.size() != dim()) {
    throw std::invalid_argument("weight vector does not match model dimensions");
  }
}

ChainPotentials build_potentials(const ChainModel& model, const ChainInstance& inst) {
  const std::size_t L = inst.unary_features.size();
  const std::size_t c = model.num_labels;
  ChainPotentials pot(L, c);
  for (std::size_t j = 0; j < L; ++j) {
    for (const FeatureEntry& e : inst.unary_features[j].entries) {
      if (e.id >= model.num_unary_features) {
        throw std::out_of_range("feature id exceeds model feature space");
      }
      for (int s = 0; s < static_cast<int>(c); ++s) {
        pot.unary_at(j, s) += model.weights[model.unary_index(s, e.id)] * e.value;
      }
    }
  }
  for (int s = 0; s < static_cast<int>(c); ++s) {
    for (int t = 0; t < static_cast<int>(c); ++t) {
      pot.trans_at(s, t) = model.weights[model.transition_index(s, t)];
    }
  }
  return pot;
}

std::vector<double> feature_map(const ChainModel& model, const ChainInstance& inst,
                                const Labeling& y) {
  if (y.size() != inst.unary_features.size()) {
    throw std::invalid_argument("labeling length does not match instance");
  }
  std::vector<double> phi(model.dim(), 0.0);
  for (std::size_t j = 0; j < y.size(); ++j) {
    for (const FeatureEntry& e : inst.unary_features[j].entries) {
      if (e.id >= model.num_unary_features) {
        throw std::out_of_range("feature id exceeds model feature space");
      }
      phi[model.unary_index(y[j], e.id)] += e.value;
    }
  }
  for (std::size_t j = 0; j + 1 < y.size(); ++j) {
    phi[model.transition_index(y[j], y[j + 1])] += 1.0;
  }
  return phi;
}

Labeling viterbi(const ChainPotentials& pot) {
  const std::size_t L = pot.length;
  const int c = static_cast<int>(pot.num_labels);
  std::vector<double> delta(pot.unary.begin(), pot.unary.begin() + c);
  std::vector<double> next(c);
  std::vector<int> back((L > 0 ? L - 1 : 0) * c);
  for (std::size_t j = 1; j < L; ++j) {
    for (int t = 0; t < c; ++t) {
      int arg = 0;
      double best = delta[0] + pot.trans_at(0, t);
      for (int s = 1; s < c; ++s) {
        double v = delta[s] + pot.trans_at(s, t);
        if (v > best) {
          best = v;
          arg = s;
        }
      }
      next[t] = best + pot.unary_at(j, t);
      back[(j - 1) * c + t] = arg;
    }
    delta.swap(next);
  }
  Labeling y(L);
  y[L - 1] = argmax_with_tiebreak(delta);
  for (std::size_t j = L - 1; j > 0; --j) {
    y[j - 1] = back[(j - 1) * c + y[j]];
  }
  return y;
}

double log_partition(const ChainPotentials& pot) {
  const std::size_t L = pot.length;
  const int c = static_cast<int>(pot.num_labels);
  std::vector<double> a(pot.unary.begin(), pot.unary.begin() + c);
  std::vector<double> next(c);
  std::vector<double> terms(c);
  for (std::size_t j = 1; j < L; ++j) {
    for (int t = 0; t < c; ++t) {
      for (int s = 0; s < c; ++s) terms[s] = a[s] + pot.trans_at(s, t);
      next[t] = log_sum_exp(terms) + pot.unary_at(j, t);
    }
    a.swap(next);
  }
  return log_sum_exp(a);
}

ChainMarginals marginals(const ChainPotentials& pot) {
  const std::size_t L = pot.length;
  const int c = static_cast<int>(pot.num_labels);
  std::vector<double> fwd(L * c), bwd(L * c);
  std::vector<double> terms(c);
  for (int s = 0; s < c; ++s) fwd[s] = pot.unary_at(0, s);
  for (std::size_t j = 1; j < L; ++j) {
    for (int t = 0; t < c; ++t) {
      for (int s = 0; s < c; ++s) terms[s] = fwd[(j - 1) * c + s] + pot.trans_at(s, t);
      fwd[j * c + t] = log_sum_exp(terms) + pot.unary_at(j, t);
    }
  }
  for (int s = 0; s < c; ++s) bwd[(L - 1) * c + s] = 0.0;
  for (std::size_t j = L - 1; j > 0; --j) {
    for (int s = 0; s < c; ++s) {
      for (int t = 0; t < c; ++t) {
        terms[t] = pot.trans_at(s, t) + pot.unary_at(j, t) + bwd[j * c + t];
      }
      bwd[(j - 1) * c + s] = log_sum_exp(terms);
    }
  }
  ChainMarginals m;
  m.length = L;
  m.num_labels = pot.num_labels;
  m.node.resize(L * c);
  m.edge.resize((L > 0 ? L - 1 : 0) * c * c);
  std::vector<double> last(fwd.begin() + (L - 1) * c, fwd.end());
  m.log_z = log_sum_exp(last);
  for (std::size_t j = 0; j < L; ++j) {
    for (int s = 0; s < c; ++s) {
      m.node[j * c + s] = std::exp(fwd[j * c + s] + bwd[j * c + s] - m.log_z);
    }
  }
  for (std::size_t j = 0; j + 1 < L; ++j) {
    for (int s = 0; s < c; ++s) {
      for (int t = 0; t < c; ++t) {
        m.edge[(j * c + s) * c + t] =
            std::exp(fwd[j * c + s] + pot.trans_at(s, t) + pot.unary_at(j + 1, t) +
                     bwd[(j + 1) * c + t] - m.log_z);
      }
    }
  }
  return m;
}

double hamming(const Labeling& a, const Labeling& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("labelings differ in length");
  }
  if (a.empty()) return 0.0;
  std::size_t diff = 0;
  for (std::size_t j = 0; j < a.size(); ++j) diff += (a[j] != b[j]);
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

Labeling loss_augmented_decode(const ChainPotentials& pot, const Labeling& gold) {
  if (gold.size() != pot.length) {
    throw std::invalid_argument("gold labeling does not match potentials");
  }
  ChainPotentials aug = pot;
  const double per_pos = 1.0 / static_cast<double>(pot.length);
  for (std::size_t j = 0; j < pot.length; ++j) {
    for (int s = 0; s < static_cast<int>(pot.num_labels); ++s) {
      if (s != gold[j]) aug.unary_at(j, s) += per_pos;
    }
  }
  return viterbi(aug);
}

double structured_hinge(const ChainModel& model, const ChainInstance& inst) {
  check_instance(model, inst);
  ChainPotentials pot = build_potentials(model, inst);
  Labeling ydag = loss_augmented_decode(pot, inst.gold_labels);
  double bracket = pot.labeling_score(ydag) + hamming(ydag, inst.gold_labels) -
                   pot.labeling_score(inst.gold_labels);
  return std::max(0.0, bracket);
}

double structured_log_loss(const ChainModel& model, const ChainInstance& inst) {
  check_instance(model, inst);
  ChainPotentials pot = build_potentials(model, inst);
  return -pot.labeling_score(inst.gold_labels) + log_partition(pot);
}

double structured_hybrid(const ChainModel& model, const ChainInstance& inst, HybridParam a) {
  const double alpha = a.value();
  if (alpha == 0.0) return structured_hinge(model, inst);
  if (alpha == 1.0) return structured_log_loss(model, inst);
  return alpha * structured_log_loss(model, inst) +
         (1.0 - alpha) * structured_hinge(model, inst);
}

std::vector<double> grad_structured_log(const ChainModel& model, const ChainInstance& inst) {
  check_instance(model, inst);
  ChainPotentials pot = build_potentials(model, inst);
  ChainMarginals m = marginals(pot);
  const std::size_t L = inst.length();
  const int c = static_cast<int>(model.num_labels);
  std::vector<double> g(model.dim(), 0.0);
  for (std::size_t j = 0; j < L; ++j) {
    for (const FeatureEntry& e : inst.unary_features[j].entries) {
      for (int s = 0; s < c; ++s) {
        g[model.unary_index(s, e.id)] += m.node_at(j, s) * e.value;
      }
    }
  }
  for (std::size_t j = 0; j + 1 < L; ++j) {
    for (int s = 0; s < c; ++s) {
      for (int t = 0; t < c; ++t) {
        g[model.transition_index(s, t)] += m.edge_at(j, s, t);
      }
    }
  }
  std::vector<double> gold = feature_map(model, inst, inst.gold_labels);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gold[i];
  return g;
}

std::vector<double> subgrad_structured_hinge(const ChainModel& model,
                                             const ChainInstance& inst) {
  check_instance(model, inst);
  ChainPotentials pot = build_potentials(model, inst);
  Labeling ydag = loss_augmented_decode(pot, inst.gold_labels);
  double bracket = pot.labeling_score(ydag) + hamming(ydag, inst.gold_labels) -
                   pot.labeling_score(inst.gold_labels);
  if (bracket <= 0.0) return std::vector<double>(model.dim(), 0.0);
  std::vector<double> g = feature_map(model, inst, ydag);
  std::vector<double> gold = feature_map(model, inst, inst.gold_labels);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gold[i];
  return g;
}

std::vector<double> subgrad_structured_hybrid(const ChainModel& model,
                                              const ChainInstance& inst, HybridParam a) {
  const double alpha = a.value();
  if (alpha == 0.0) return subgrad_structured_hinge(model, inst);
  if (alpha == 1.0) return grad_structured_log(model, inst);
  std::vector<double> g = grad_structured_log(model, inst);
  std::vector<double> h = subgrad_structured_hinge(model, inst);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = alpha * g[i] + (1.0 - alpha) * h[i];
  }
  return g;
}

}  // namespace hybridloss
