#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hybridloss/losses.hpp"

namespace hybridloss {

/// Largest and second-largest probabilities of a distribution.
/// d_next is empty when every label ties for the maximum.
struct DominanceStats {
  double d_max = 0.0;
  std::optional<double> d_next;
  std::vector<int> y_max_set;  // labels within 1e-12 of d_max, ascending
};

DominanceStats dominance_stats(const LabelDistribution& d);

/// Consistency prediction for a distribution. `threshold` is the
/// smallest alpha (exclusive) for which alignment of the risk minimizer
/// is guaranteed; it is -infinity when some label has probability >= 1/2
/// or when all labels tie for the maximum.
struct ConsistencyVerdict {
  double threshold = 0.0;
  bool dominant = false;

  bool predicts_consistent(double alpha) const { return alpha > threshold; }
};

ConsistencyVerdict alpha_threshold(const LabelDistribution& d);

/// Raised when the risk-minimizer search fails to stabilize within its
/// iteration budget. A test-infrastructure failure, never a silent result.
class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleOptions {
  int random_restarts = 8;
  int descent_iterations = 400;
  int max_polish_sweeps = 250;
  double coordinate_range = 60.0;  // search box half-width per coordinate
  std::uint64_t seed = 0x5eedULL;
};

/// Minimizes conditional_risk(f, d, a) over score vectors, returning a
/// minimizer normalized to max component 0. Multi-start subgradient
/// descent followed by golden-section polish; the objective is convex,
/// so the best stabilized point is the global optimum up to tolerance.
/// Throws OracleFailure if no start stabilizes.
ScoreVector minimize_conditional_risk(const LabelDistribution& d, HybridParam a,
                                      const OracleOptions& opt = {});

/// Independent second route: dense grid search over score vectors
/// normalized to max component 0, coordinates in [-radius, 0] with the
/// given step. Only supported for k <= 4.
ScoreVector grid_minimize_conditional_risk(const LabelDistribution& d, HybridParam a,
                                           double step = 0.01, double radius = 3.0);

/// True iff the argmax set of f (tolerance 1e-9) is a subset of the
/// most-probable labels of d (tolerance 1e-12).
bool is_aligned(const ScoreVector& f, const LabelDistribution& d);

struct AlignmentCheckRecord {
  double threshold = 0.0;
  bool predicted = false;  // alpha above the threshold
  bool observed = false;   // risk minimizer aligned with d
};

/// Runs the risk-minimizer search and compares the alignment prediction
/// to the observed minimizer. The prediction is sufficient, not
/// necessary: observed alignment without prediction is allowed.
AlignmentCheckRecord check_alignment_prediction(const LabelDistribution& d, HybridParam a,
                                                const OracleOptions& opt = {});

struct FConsistencyRecord {
  double zero_one_risk = 0.0;      // worst case over tie-breaking rules
  double min_zero_one_risk = 0.0;  // 1 - d_max
  bool attains_min = false;
};

/// Empirical probe on an unconstrained score table for a single
/// observation: minimizes the weighted hybrid risk and reports whether
/// the resulting classifier attains the minimal 0-1 risk. The check
/// quantifies over tie-breaking rules, so a tied argmax attains the
/// minimum only if every tied label is a most-probable label.
FConsistencyRecord probe_f_consistency(const LabelDistribution& d, HybridParam a,
                                       const OracleOptions& opt = {});

}  // namespace hybridloss
