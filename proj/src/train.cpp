#include "hybridloss/train.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace hybridloss {

namespace rngutil {

std::uint64_t next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(next(state) >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(std::uint64_t& state, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below needs n >= 1");
  const std::uint64_t limit = ~0ULL - ~0ULL % n;
  std::uint64_t v;
  do {
    v = next(state);
  } while (v >= limit);
  return v % n;
}

double normal(std::uint64_t& state) {
  double u, v, s;
  do {
    u = 2.0 * uniform01(state) - 1.0;
    v = 2.0 * uniform01(state) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

void shuffle(std::vector<std::size_t>& idx, std::uint64_t& state) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = uniform_below(state, i);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace rngutil

ScoreVector multiclass_scores(const WeightVector& w, std::size_t num_labels,
                              std::size_t feature_dim, const SparseFeatureVector& phi) {
  ScoreVector f(num_labels, 0.0);
  for (const FeatureEntry& e : phi.entries) {
    if (e.id >= feature_dim) {
      throw std::out_of_range("feature id exceeds feature dimension");
    }
    for (std::size_t y = 0; y < num_labels; ++y) {
      f[y] += w[y * feature_dim + e.id] * e.value;
    }
  }
  return f;
}

namespace {

void check_config(const TrainConfig& cfg) {
  if (cfg.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (cfg.minibatch < 1) throw std::invalid_argument("minibatch must be at least 1");
  HybridParam check_alpha(cfg.alpha);
  (void)check_alpha;
}

double squared_norm(const WeightVector& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

// Full (sub)gradient descent with backtracking line search. A failed
// line search means the iterate sits on a kink of the hinge part where
// the negative subgradient need not be a descent direction. A short
// burst of normalized diminishing-step subgradient moves then hunts for
// a strictly better point; if none exists the kink is accepted as the
// minimizer and training stops, keeping the trace non-increasing.
TrainReport run_batch(std::size_t dim, int epochs,
                      const std::function<double(const WeightVector&)>& objective,
                      const std::function<WeightVector(const WeightVector&)>& gradient) {
  TrainReport report;
  WeightVector w(dim, 0.0);
  double obj = objective(w);
  if (!std::isfinite(obj)) throw std::runtime_error("objective is not finite");
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    WeightVector g = gradient(w);
    double gn2 = squared_norm(g);
    if (gn2 == 0.0) {
      report.objective_trace.push_back(obj);
      report.epochs_run = epoch;
      break;
    }
    double step = 1.0;
    bool accepted = false;
    WeightVector cand(dim);
    double cand_obj = obj;
    for (int trial = 0; trial <= 40; ++trial) {
      for (std::size_t i = 0; i < dim; ++i) cand[i] = w[i] - step * g[i];
      cand_obj = objective(cand);
      if (cand_obj <= obj - 1e-4 * step * gn2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      WeightVector probe = w;
      WeightVector probe_g = g;
      WeightVector best = w;
      double best_obj = obj;
      const double scale = 0.1 * (1.0 + std::sqrt(squared_norm(w)));
      for (int burst = 1; burst <= 40; ++burst) {
        double pn = std::sqrt(squared_norm(probe_g));
        if (pn == 0.0) break;
        double eta = scale / std::sqrt(static_cast<double>(burst));
        for (std::size_t i = 0; i < dim; ++i) probe[i] -= eta * probe_g[i] / pn;
        double probe_obj = objective(probe);
        if (std::isfinite(probe_obj) && probe_obj < best_obj - 1e-12) {
          best_obj = probe_obj;
          best = probe;
        }
        probe_g = gradient(probe);
      }
      if (best_obj >= obj - 1e-12) {
        report.objective_trace.push_back(obj);
        report.epochs_run = epoch;
        break;
      }
      cand = best;
      cand_obj = best_obj;
    }
    if (!std::isfinite(cand_obj)) throw std::runtime_error("objective is not finite");
    double prev = obj;
    w = cand;
    obj = cand_obj;
    report.objective_trace.push_back(obj);
    report.epochs_run = epoch;
    if (prev - obj < 1e-10) break;
  }
  report.final_weights = std::move(w);
  return report;
}

// Pegasos-style schedule: at update t, w <- (1 - 1/t) w - (1/(lambda t)) g
// with g the mini-batch average loss subgradient. Runs all epochs; the
// trace records the full objective after each epoch.
TrainReport run_stochastic(
    std::size_t dim, std::size_t num_examples, const TrainConfig& cfg,
    const std::function<double(const WeightVector&)>& objective,
    const std::function<void(const WeightVector&, const std::vector<std::size_t>&,
                             WeightVector&)>& batch_subgrad) {
  TrainReport report;
  WeightVector w(dim, 0.0);
  WeightVector g(dim);
  std::vector<std::size_t> order(num_examples);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t state = cfg.seed;
  const std::size_t batch = static_cast<std::size_t>(cfg.minibatch);
  std::uint64_t t = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rngutil::shuffle(order, state);
    for (std::size_t start = 0; start < num_examples; start += batch) {
      std::size_t stop = std::min(start + batch, num_examples);
      std::vector<std::size_t> ids(order.begin() + start, order.begin() + stop);
      std::sort(ids.begin(), ids.end());
      std::fill(g.begin(), g.end(), 0.0);
      batch_subgrad(w, ids, g);
      ++t;
      double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      double keep = 1.0 - 1.0 / static_cast<double>(t);
      for (std::size_t i = 0; i < dim; ++i) w[i] = keep * w[i] - eta * g[i];
    }
    double obj = objective(w);
    if (!std::isfinite(obj)) throw std::runtime_error("objective is not finite");
    report.objective_trace.push_back(obj);
    report.epochs_run = epoch;
  }
  report.final_weights = std::move(w);
  return report;
}

}  // namespace

double multiclass_objective(const MulticlassDataset& data, const WeightVector& w,
                            double lambda, HybridParam a) {
  double total_weight = 0.0;
  for (const MulticlassExample& ex : data.examples) total_weight += ex.weight;
  if (total_weight <= 0.0) throw std::invalid_argument("dataset has no weight");
  double loss = 0.0;
  for (const MulticlassExample& ex : data.examples) {
    ScoreVector f = multiclass_scores(w, data.num_labels, data.feature_dim, ex.features);
    loss += ex.weight * hybrid_loss(f, ex.label, a);
  }
  return loss / total_weight + 0.5 * lambda * squared_norm(w);
}

double chain_objective(const std::vector<ChainInstance>& data, const ChainModel& model,
                       double lambda, HybridParam a) {
  if (data.empty()) throw std::invalid_argument("empty chain dataset");
  double loss = 0.0;
  for (const ChainInstance& inst : data) {
    loss += structured_hybrid(model, inst, a);
  }
  return loss / static_cast<double>(data.size()) + 0.5 * lambda * squared_norm(model.weights);
}

TrainReport train_multiclass(const MulticlassDataset& data, const TrainConfig& cfg) {
  check_config(cfg);
  if (data.examples.empty()) throw std::invalid_argument("empty dataset");
  if (data.num_labels < 2) throw std::invalid_argument("need at least two labels");
  for (const MulticlassExample& ex : data.examples) {
    if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= data.num_labels) {
      throw std::invalid_argument("example label out of range");
    }
    if (ex.weight <= 0.0) throw std::invalid_argument("example weight must be positive");
  }
  const std::size_t dim = data.num_labels * data.feature_dim;
  const HybridParam a(cfg.alpha);
  double total_weight = 0.0;
  for (const MulticlassExample& ex : data.examples) total_weight += ex.weight;

  auto objective = [&](const WeightVector& w) {
    return multiclass_objective(data, w, cfg.lambda, a);
  };
  auto add_example = [&](const WeightVector& w, std::size_t i, double coeff,
                         WeightVector& g) {
    const MulticlassExample& ex = data.examples[i];
    ScoreVector f = multiclass_scores(w, data.num_labels, data.feature_dim, ex.features);
    std::vector<double> gs = subgrad_hybrid_loss(f, ex.label, a);
    for (std::size_t y = 0; y < data.num_labels; ++y) {
      if (gs[y] == 0.0) continue;
      for (const FeatureEntry& e : ex.features.entries) {
        g[y * data.feature_dim + e.id] += coeff * gs[y] * e.value;
      }
    }
  };

  if (cfg.mode == TrainMode::kBatch) {
    auto gradient = [&](const WeightVector& w) {
      WeightVector g(dim, 0.0);
      for (std::size_t i = 0; i < data.examples.size(); ++i) {
        add_example(w, i, data.examples[i].weight / total_weight, g);
      }
      for (std::size_t i = 0; i < dim; ++i) g[i] += cfg.lambda * w[i];
      return g;
    };
    return run_batch(dim, cfg.epochs, objective, gradient);
  }
  auto batch_subgrad = [&](const WeightVector& w, const std::vector<std::size_t>& ids,
                           WeightVector& g) {
    double batch_weight = 0.0;
    for (std::size_t i : ids) batch_weight += data.examples[i].weight;
    for (std::size_t i : ids) {
      add_example(w, i, data.examples[i].weight / batch_weight, g);
    }
  };
  return run_stochastic(dim, data.examples.size(), cfg, objective, batch_subgrad);
}

TrainReport train_chain(const std::vector<ChainInstance>& data, std::size_t num_labels,
                        std::size_t num_unary_features, const TrainConfig& cfg) {
  check_config(cfg);
  if (data.empty()) throw std::invalid_argument("empty chain dataset");
  if (num_labels < 2) throw std::invalid_argument("need at least two labels");
  const HybridParam a(cfg.alpha);
  ChainModel scratch(num_labels, num_unary_features);
  const std::size_t dim = scratch.dim();

  auto objective = [&](const WeightVector& w) {
    ChainModel m(num_labels, num_unary_features, w);
    return chain_objective(data, m, cfg.lambda, a);
  };
  auto add_instance = [&](const WeightVector& w, std::size_t i, double coeff,
                          WeightVector& g) {
    ChainModel m(num_labels, num_unary_features, w);
    std::vector<double> gi = subgrad_structured_hybrid(m, data[i], a);
    for (std::size_t j = 0; j < dim; ++j) g[j] += coeff * gi[j];
  };

  if (cfg.mode == TrainMode::kBatch) {
    auto gradient = [&](const WeightVector& w) {
      WeightVector g(dim, 0.0);
      const double coeff = 1.0 / static_cast<double>(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) add_instance(w, i, coeff, g);
      for (std::size_t j = 0; j < dim; ++j) g[j] += cfg.lambda * w[j];
      return g;
    };
    return run_batch(dim, cfg.epochs, objective, gradient);
  }
  auto batch_subgrad = [&](const WeightVector& w, const std::vector<std::size_t>& ids,
                           WeightVector& g) {
    const double coeff = 1.0 / static_cast<double>(ids.size());
    for (std::size_t i : ids) add_instance(w, i, coeff, g);
  };
  return run_stochastic(dim, data.size(), cfg, objective, batch_subgrad);
}

}  // namespace hybridloss
