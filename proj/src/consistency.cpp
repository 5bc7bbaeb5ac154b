#include "hybridloss/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hybridloss/train.hpp"

namespace hybridloss {

namespace {

constexpr double kProbTieTol = 1e-12;
constexpr double kScoreTieTol = 1e-9;

double risk_of(const ScoreVector& f, const LabelDistribution& d, HybridParam a) {
  return conditional_risk(f, d, a);
}

void subtract_max(ScoreVector& f) {
  double m = *std::max_element(f.begin(), f.end());
  for (double& v : f) v -= m;
}

/// Golden-section minimum of a convex 1-D function on [lo, hi].
template <typename F>
double golden_min(const F& h, double lo, double hi, double xtol) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double hc = h(c), hd = h(d);
  while (b - a > xtol) {
    if (hc < hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - invphi * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + invphi * (b - a);
      hd = h(d);
    }
  }
  return 0.5 * (a + b);
}

/// Minimizes risk along f + t * dir with an expanding bracket; updates f
/// in place when the move improves the risk. Returns the improvement.
double line_minimize(ScoreVector& f, const std::vector<double>& dir,
                     const LabelDistribution& d, HybridParam a, double range) {
  auto h = [&](double t) {
    ScoreVector g = f;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += t * dir[i];
    return risk_of(g, d, a);
  };
  double h0 = h(0.0);
  double step = 1.0;
  double lo = -step, hi = step;
  if (h(step) < h0) {
    double t = step;
    while (t < range && h(2.0 * t) < h(t)) t *= 2.0;
    lo = 0.0;
    hi = std::min(2.0 * t, 2.0 * range);
  } else if (h(-step) < h0) {
    double t = step;
    while (t < range && h(-2.0 * t) < h(-t)) t *= 2.0;
    lo = -std::min(2.0 * t, 2.0 * range);
    hi = 0.0;
  }
  double t_best = golden_min(h, lo, hi, 3e-13);
  double h_best = h(t_best);
  if (h_best < h0) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += t_best * dir[i];
    return h0 - h_best;
  }
  return 0.0;
}

struct PolishResult {
  ScoreVector f;
  double risk = 0.0;
  bool converged = false;
};

PolishResult polish(ScoreVector f, const LabelDistribution& d, HybridParam a,
                    const OracleOptions& opt, std::uint64_t& rng) {
  const std::size_t k = f.size();
  std::vector<double> dir(k, 0.0);
  double risk = risk_of(f, d, a);
  int stable_sweeps = 0;
  bool converged = false;
  for (int sweep = 0; sweep < opt.max_polish_sweeps; ++sweep) {
    double improved = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      std::fill(dir.begin(), dir.end(), 0.0);
      dir[i] = 1.0;
      improved += line_minimize(f, dir, d, a, opt.coordinate_range);
    }
    // Two random directions per sweep guard against coordinate-wise
    // stalls at non-smooth points; the flat all-ones direction is
    // projected out.
    for (int r = 0; r < 2; ++r) {
      double mean = 0.0, norm = 0.0;
      for (std::size_t i = 0; i < k; ++i) dir[i] = rngutil::uniform01(rng) - 0.5;
      for (double v : dir) mean += v / static_cast<double>(k);
      for (double& v : dir) v -= mean;
      for (double v : dir) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 1e-12) continue;
      for (double& v : dir) v /= norm;
      improved += line_minimize(f, dir, d, a, opt.coordinate_range);
    }
    risk = risk_of(f, d, a);
    if (improved < 1e-14 * std::max(1.0, std::abs(risk))) {
      if (++stable_sweeps >= 2) {
        converged = true;
        break;
      }
    } else {
      stable_sweeps = 0;
    }
  }
  subtract_max(f);
  double final_risk = risk_of(f, d, a);
  return {std::move(f), final_risk, converged};
}

ScoreVector descend(ScoreVector f, const LabelDistribution& d, HybridParam a,
                    const OracleOptions& opt) {
  ScoreVector best = f;
  double best_risk = risk_of(f, d, a);
  const std::size_t k = f.size();
  for (int t = 1; t <= opt.descent_iterations; ++t) {
    std::vector<double> g(k, 0.0);
    for (int y = 0; y < static_cast<int>(k); ++y) {
      if (d[y] <= 0.0) continue;
      std::vector<double> gy = subgrad_hybrid_loss(f, y, a);
      for (std::size_t i = 0; i < k; ++i) g[i] += d[y] * gy[i];
    }
    double eta = 0.5 / std::sqrt(static_cast<double>(t));
    for (std::size_t i = 0; i < k; ++i) {
      f[i] -= eta * g[i];
      f[i] = std::clamp(f[i], -opt.coordinate_range, opt.coordinate_range);
    }
    double r = risk_of(f, d, a);
    if (r < best_risk) {
      best_risk = r;
      best = f;
    }
  }
  return best;
}

}  // namespace

DominanceStats dominance_stats(const LabelDistribution& d) {
  DominanceStats s;
  s.d_max = *std::max_element(d.probs().begin(), d.probs().end());
  double next = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < static_cast<int>(d.size()); ++y) {
    if (d[y] >= s.d_max - kProbTieTol) {
      s.y_max_set.push_back(y);
    } else {
      next = std::max(next, d[y]);
    }
  }
  if (s.y_max_set.size() < d.size()) s.d_next = next;
  return s;
}

ConsistencyVerdict alpha_threshold(const LabelDistribution& d) {
  DominanceStats s = dominance_stats(d);
  ConsistencyVerdict v;
  v.dominant = s.d_max >= 0.5;
  if (v.dominant || !s.d_next.has_value()) {
    v.threshold = -std::numeric_limits<double>::infinity();
  } else {
    v.threshold = 1.0 - (s.d_max - *s.d_next) / (1.0 - 2.0 * s.d_max);
  }
  return v;
}

ScoreVector minimize_conditional_risk(const LabelDistribution& d, HybridParam a,
                                      const OracleOptions& opt) {
  const std::size_t k = d.size();
  if (k > 12) {
    throw std::invalid_argument("risk-minimizer search supports at most 12 labels");
  }
  std::uint64_t rng = opt.seed;

  std::vector<ScoreVector> starts;
  starts.emplace_back(k, 0.0);
  ScoreVector logd(k);
  for (std::size_t y = 0; y < k; ++y) {
    logd[y] = d[y] > 0.0 ? std::log(d[y]) : -opt.coordinate_range;
  }
  subtract_max(logd);
  starts.push_back(std::move(logd));
  ScoreVector spike(k, 0.0);
  spike[argmax_with_tiebreak(ScoreVector(d.probs()))] = 1.0;
  starts.push_back(std::move(spike));
  for (int r = 0; r < opt.random_restarts; ++r) {
    ScoreVector f(k);
    for (std::size_t i = 0; i < k; ++i) f[i] = 4.0 * rngutil::uniform01(rng) - 2.0;
    starts.push_back(std::move(f));
  }

  bool any_converged = false;
  double best_risk = std::numeric_limits<double>::infinity();
  double best_unconverged = std::numeric_limits<double>::infinity();
  ScoreVector best;
  for (ScoreVector& s : starts) {
    PolishResult res = polish(descend(std::move(s), d, a, opt), d, a, opt, rng);
    if (res.converged) {
      any_converged = true;
      if (res.risk < best_risk) {
        best_risk = res.risk;
        best = std::move(res.f);
      }
    } else {
      best_unconverged = std::min(best_unconverged, res.risk);
    }
  }
  if (!any_converged || best_unconverged < best_risk - 1e-9) {
    throw OracleFailure("conditional-risk minimizer did not stabilize");
  }
  return best;
}

ScoreVector grid_minimize_conditional_risk(const LabelDistribution& d, HybridParam a,
                                           double step, double radius) {
  const std::size_t k = d.size();
  if (k > 4) {
    throw std::invalid_argument("grid search supports at most 4 labels");
  }
  const int n = static_cast<int>(std::lround(radius / step)) + 1;
  auto value_at = [&](int j) { return -step * static_cast<double>(n - 1 - j); };

  ScoreVector best;
  double best_risk = std::numeric_limits<double>::infinity();
  ScoreVector f(k, 0.0);
  // One coordinate is pinned to 0 (the max); the rest scan [-radius, 0].
  for (std::size_t pin = 0; pin < k; ++pin) {
    std::vector<int> idx(k - 1, 0);
    while (true) {
      std::size_t pos = 0;
      for (std::size_t i = 0; i < k; ++i) {
        f[i] = (i == pin) ? 0.0 : value_at(idx[pos++]);
      }
      double r = risk_of(f, d, a);
      if (r < best_risk) {
        best_risk = r;
        best = f;
      }
      std::size_t carry = 0;
      while (carry < idx.size()) {
        if (++idx[carry] < n) break;
        idx[carry] = 0;
        ++carry;
      }
      if (carry == idx.size()) break;
    }
  }
  return best;
}

bool is_aligned(const ScoreVector& f, const LabelDistribution& d) {
  if (f.size() != d.size()) {
    throw std::invalid_argument("score and distribution dimensions differ");
  }
  double fmax = *std::max_element(f.begin(), f.end());
  double dmax = *std::max_element(d.probs().begin(), d.probs().end());
  for (std::size_t y = 0; y < f.size(); ++y) {
    if (f[y] >= fmax - kScoreTieTol && d[y] < dmax - kProbTieTol) return false;
  }
  return true;
}

AlignmentCheckRecord check_alignment_prediction(const LabelDistribution& d, HybridParam a,
                                                const OracleOptions& opt) {
  ConsistencyVerdict v = alpha_threshold(d);
  AlignmentCheckRecord rec;
  rec.threshold = v.threshold;
  rec.predicted = v.predicts_consistent(a.value());
  rec.observed = is_aligned(minimize_conditional_risk(d, a, opt), d);
  return rec;
}

FConsistencyRecord probe_f_consistency(const LabelDistribution& d, HybridParam a,
                                       const OracleOptions& opt) {
  ScoreVector f = minimize_conditional_risk(d, a, opt);
  double fmax = *std::max_element(f.begin(), f.end());
  double worst = 1.0;  // probability of the least likely argmax label
  for (std::size_t y = 0; y < f.size(); ++y) {
    if (f[y] >= fmax - kScoreTieTol) worst = std::min(worst, d[y]);
  }
  FConsistencyRecord rec;
  rec.zero_one_risk = 1.0 - worst;
  rec.min_zero_one_risk = 1.0 - *std::max_element(d.probs().begin(), d.probs().end());
  rec.attains_min = rec.zero_one_risk <= rec.min_zero_one_risk + 1e-3;
  return rec;
}

}  // namespace hybridloss
