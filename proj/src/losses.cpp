#include "hybridloss/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hybridloss {

HybridParam::HybridParam(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("hybrid parameter must lie in [0, 1]");
  }
}

double hinge_loss(const ScoreVector& f, int y) {
  return std::max(0.0, 1.0 - margin(f, y));
}

double log_loss(const ScoreVector& f, int y) {
  return -f[y] + log_sum_exp(f);
}

double hinge_loss_prob(const LabelDistribution& p, int y) {
  double best_other = 0.0;
  for (int v = 0; v < static_cast<int>(p.size()); ++v) {
    if (p[v] <= 0.0) {
      throw std::domain_error("probability-space hinge needs strictly positive entries");
    }
    if (v != y) best_other = std::max(best_other, p[v]);
  }
  return std::max(0.0, 1.0 - std::log(p[y] / best_other));
}

double hybrid_loss(const ScoreVector& f, int y, HybridParam a) {
  double alpha = a.value();
  if (alpha == 0.0) return hinge_loss(f, y);
  if (alpha == 1.0) return log_loss(f, y);
  return alpha * log_loss(f, y) + (1.0 - alpha) * hinge_loss(f, y);
}

std::vector<double> grad_log_loss(const ScoreVector& f, int y) {
  std::vector<double> g = softmax(f).probs();
  g[y] -= 1.0;
  return g;
}

std::vector<double> subgrad_hinge_loss(const ScoreVector& f, int y) {
  std::vector<double> g(f.size(), 0.0);
  if (1.0 - margin(f, y) <= 0.0) return g;  // flat side at and past the kink
  int runner = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < static_cast<int>(f.size()); ++v) {
    if (v != y && f[v] > best) {
      best = f[v];
      runner = v;
    }
  }
  g[runner] = 1.0;
  g[y] -= 1.0;
  return g;
}

std::vector<double> subgrad_hybrid_loss(const ScoreVector& f, int y, HybridParam a) {
  double alpha = a.value();
  if (alpha == 0.0) return subgrad_hinge_loss(f, y);
  std::vector<double> g = grad_log_loss(f, y);
  if (alpha == 1.0) return g;
  std::vector<double> h = subgrad_hinge_loss(f, y);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = alpha * g[i] + (1.0 - alpha) * h[i];
  return g;
}

double conditional_risk(const ScoreVector& f, const LabelDistribution& d, HybridParam a) {
  if (f.size() != d.size()) {
    throw std::invalid_argument("score and distribution dimensions differ");
  }
  double risk = 0.0;
  for (int y = 0; y < static_cast<int>(d.size()); ++y) {
    if (d[y] > 0.0) risk += d[y] * hybrid_loss(f, y, a);
  }
  return risk;
}

}  // namespace hybridloss
