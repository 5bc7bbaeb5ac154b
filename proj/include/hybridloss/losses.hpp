#pragma once

#include "hybridloss/core.hpp"

namespace hybridloss {

/// Mixing weight between the log loss (alpha = 1) and the multiclass
/// hinge loss (alpha = 0). Must lie in [0, 1].
class HybridParam {
 public:
  explicit HybridParam(double alpha);
  double value() const { return alpha_; }

 private:
  double alpha_;
};

/// max(0, 1 - margin(f, y)).
double hinge_loss(const ScoreVector& f, int y);

/// -f_y + logsumexp(f) = -ln softmax(f)_y.
double log_loss(const ScoreVector& f, int y);

/// Hinge loss evaluated on a probability vector:
/// [1 - ln(p_y / max_{y' != y} p_{y'})]_+.
/// Equals hinge_loss(f, y) whenever p = softmax(f). Throws
/// std::domain_error if any entry of p is zero.
double hinge_loss_prob(const LabelDistribution& p, int y);

/// alpha * log_loss + (1 - alpha) * hinge_loss.
double hybrid_loss(const ScoreVector& f, int y, HybridParam a);

/// softmax(f) - e_y. Entries sum to 0.
std::vector<double> grad_log_loss(const ScoreVector& f, int y);

/// e_{y'} - e_y with y' the lowest-id best competitor, when the hinge
/// is active (1 - margin > 0); the zero vector otherwise, including at
/// the kink itself.
std::vector<double> subgrad_hinge_loss(const ScoreVector& f, int y);

/// alpha * grad_log_loss + (1 - alpha) * subgrad_hinge_loss.
std::vector<double> subgrad_hybrid_loss(const ScoreVector& f, int y, HybridParam a);

/// E_{y ~ D}[hybrid_loss(f, y, a)].
double conditional_risk(const ScoreVector& f, const LabelDistribution& d, HybridParam a);

}  // namespace hybridloss
