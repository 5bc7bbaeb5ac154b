#include "hybridloss/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridloss {

namespace {

std::string fmt(double v) { return format_cell(Cell(v)); }

double weighted_error(const MulticlassDataset& data, const WeightVector& w) {
  double total = 0.0;
  double wrong = 0.0;
  for (const MulticlassExample& ex : data.examples) {
    ScoreVector f = multiclass_scores(w, data.num_labels, data.feature_dim, ex.features);
    if (argmax_with_tiebreak(f) != ex.label) wrong += ex.weight;
    total += ex.weight;
  }
  return wrong / total;
}

double accuracy(const MulticlassDataset& data, const WeightVector& w) {
  return 1.0 - weighted_error(data, w);
}

// Error on the one-observation population with ties scored against the
// least favorable tie-breaker (tie tolerance 1e-9). A scorer that
// leaves several labels tied for the top score is only as good as the
// least probable label in the tie set, matching the alignment probe's
// quantification over tie-breaking rules. A hinge-trained model ends at
// the all-tie point here, so this is where its error shows up.
double worst_tie_error(const MulticlassDataset& data, const WeightVector& w) {
  ScoreVector f = multiclass_scores(w, data.num_labels, data.feature_dim,
                                    data.examples.front().features);
  double top = *std::max_element(f.begin(), f.end());
  std::vector<double> mass(data.num_labels, 0.0);
  double total = 0.0;
  for (const MulticlassExample& ex : data.examples) {
    mass[ex.label] += ex.weight;
    total += ex.weight;
  }
  double kept = 1.0;
  for (std::size_t y = 0; y < data.num_labels; ++y) {
    if (f[y] >= top - 1e-9) kept = std::min(kept, mass[y] / total);
  }
  return 1.0 - kept;
}

}  // namespace

ExperimentReport run_exp1(const Exp1Options& opt) {
  if (opt.k_min < 3 || opt.k_max > 10 || opt.k_min > opt.k_max) {
    throw std::invalid_argument("k range must satisfy 3 <= k_min <= k_max <= 10");
  }
  ExperimentReport report;
  report.experiment = "exp1";
  report.seed = opt.seed;
  report.config = {{"alpha", fmt(opt.alpha)},
                   {"lambda", fmt(opt.lambda)},
                   {"k_min", std::to_string(opt.k_min)},
                   {"k_max", std::to_string(opt.k_max)},
                   {"epochs", std::to_string(opt.epochs)}};
  report.columns = {"k", "loss", "alpha", "error"};

  const std::pair<const char*, double> losses[] = {
      {"hinge", 0.0}, {"log", 1.0}, {"hybrid", opt.alpha}};
  for (int k = opt.k_min; k <= opt.k_max; ++k) {
    MulticlassDataset data = gen_exp1(k);
    for (const auto& [name, alpha] : losses) {
      TrainConfig cfg;
      cfg.lambda = opt.lambda;
      cfg.alpha = alpha;
      cfg.epochs = opt.epochs;
      cfg.seed = opt.seed;
      cfg.mode = TrainMode::kBatch;
      TrainReport trained = train_multiclass(data, cfg);
      report.add_row({Cell(static_cast<long long>(k)), Cell(std::string(name)),
                      Cell(alpha), Cell(worst_tie_error(data, trained.final_weights))});
    }
  }
  return report;
}

namespace {

struct SweepChoice {
  double lambda = 0.0;
  double alpha = 0.0;
  double val_acc = -1.0;
  WeightVector weights;
};

SweepChoice select_and_train(const Exp2Data& data, const std::vector<double>& lambdas,
                             const std::vector<double>& alphas, int epochs,
                             std::uint64_t seed) {
  SweepChoice best;
  for (double lambda : lambdas) {
    for (double alpha : alphas) {
      TrainConfig cfg;
      cfg.lambda = lambda;
      cfg.alpha = alpha;
      cfg.epochs = epochs;
      cfg.minibatch = 10;
      cfg.seed = seed;
      cfg.mode = TrainMode::kStochastic;
      TrainReport trained = train_multiclass(data.train, cfg);
      double acc = accuracy(data.validation, trained.final_weights);
      if (acc > best.val_acc) {
        best = {lambda, alpha, acc, std::move(trained.final_weights)};
      }
    }
  }
  return best;
}

}  // namespace

ExperimentReport run_exp2(const Exp2Options& opt) {
  ExperimentReport report;
  report.experiment = "exp2";
  report.seed = opt.seed;
  report.config = {{"epochs", std::to_string(opt.epochs)}};
  report.columns = {"kind",    "rho",      "m",    "loss",   "lambda",
                    "alpha",   "val_acc",  "test_acc", "wins", "losses"};

  const std::vector<double> rhos = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const std::vector<int> sizes = {30, 60, 100, 300, 600, 1000};
  const std::vector<double> hinge_alpha = {0.0};
  const std::vector<double> log_alpha = {1.0};

  // Pairwise win counters indexed as hybrid/hinge, hybrid/log, log/hinge.
  int wins[3] = {0, 0, 0};
  int losses_count[3] = {0, 0, 0};

  std::uint64_t seed_state = opt.seed;
  for (double rho : rhos) {
    for (int m : sizes) {
      std::uint64_t data_seed = rngutil::next(seed_state);
      Exp2Data data = gen_exp2(rho, m, data_seed);
      SweepChoice hinge =
          select_and_train(data, opt.lambda_grid, hinge_alpha, opt.epochs, opt.seed);
      SweepChoice log_choice =
          select_and_train(data, opt.lambda_grid, log_alpha, opt.epochs, opt.seed);
      SweepChoice hybrid =
          select_and_train(data, opt.lambda_grid, opt.alpha_grid, opt.epochs, opt.seed);
      double acc_hinge = accuracy(data.test, hinge.weights);
      double acc_log = accuracy(data.test, log_choice.weights);
      double acc_hybrid = accuracy(data.test, hybrid.weights);

      auto emit = [&](const char* name, const SweepChoice& c, double test_acc) {
        report.add_row({Cell(std::string("result")), Cell(rho),
                        Cell(static_cast<long long>(m)), Cell(std::string(name)),
                        Cell(c.lambda), Cell(c.alpha), Cell(c.val_acc), Cell(test_acc),
                        Cell(std::string("")), Cell(std::string(""))});
      };
      emit("hinge", hinge, acc_hinge);
      emit("log", log_choice, acc_log);
      emit("hybrid", hybrid, acc_hybrid);

      const double pairs[3][2] = {{acc_hybrid, acc_hinge},
                                  {acc_hybrid, acc_log},
                                  {acc_log, acc_hinge}};
      for (int p = 0; p < 3; ++p) {
        if (pairs[p][0] > pairs[p][1]) ++wins[p];
        else if (pairs[p][0] < pairs[p][1]) ++losses_count[p];
      }
    }
  }

  const char* names[3] = {"hybrid_vs_hinge", "hybrid_vs_log", "log_vs_hinge"};
  for (int p = 0; p < 3; ++p) {
    report.add_row({Cell(std::string("summary")), Cell(std::string("")),
                    Cell(std::string("")), Cell(std::string(names[p])),
                    Cell(std::string("")), Cell(std::string("")), Cell(std::string("")),
                    Cell(std::string("")), Cell(static_cast<long long>(wins[p])),
                    Cell(static_cast<long long>(losses_count[p]))});
  }
  return report;
}

namespace {

struct ChunkEval {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Chunk metrics over a whole corpus. Sentences are joined with a single
// "O" separator so spans cannot merge across boundaries; token accuracy
// is computed over the real tokens only.
ChunkEval evaluate_chain(const ChainModel& model, const std::vector<ChainInstance>& data,
                         const std::vector<std::string>& label_names) {
  std::vector<std::string> gold_joined, pred_joined;
  std::size_t tokens = 0, hits = 0;
  for (const ChainInstance& inst : data) {
    Labeling pred = viterbi(build_potentials(model, inst));
    for (std::size_t j = 0; j < inst.length(); ++j) {
      const std::string& g = label_names[static_cast<std::size_t>(inst.gold_labels[j])];
      const std::string& p = label_names[static_cast<std::size_t>(pred[j])];
      gold_joined.push_back(g);
      pred_joined.push_back(p);
      ++tokens;
      hits += (g == p);
    }
    gold_joined.push_back("O");
    pred_joined.push_back("O");
  }
  ChunkMetrics m = chunk_metrics(gold_joined, pred_joined);
  ChunkEval ev;
  ev.accuracy = tokens ? 100.0 * static_cast<double>(hits) / static_cast<double>(tokens) : 0.0;
  ev.precision = m.precision;
  ev.recall = m.recall;
  ev.f1 = m.f1;
  return ev;
}

double token_accuracy(const ChainModel& model, const std::vector<ChainInstance>& data) {
  std::size_t tokens = 0, hits = 0;
  for (const ChainInstance& inst : data) {
    Labeling pred = viterbi(build_potentials(model, inst));
    for (std::size_t j = 0; j < inst.length(); ++j) {
      ++tokens;
      hits += (pred[j] == inst.gold_labels[j]);
    }
  }
  return tokens ? static_cast<double>(hits) / static_cast<double>(tokens) : 0.0;
}

}  // namespace

ExperimentReport run_chunk(const ChunkOptions& opt) {
  if (opt.loss != "hinge" && opt.loss != "log" && opt.loss != "hybrid") {
    throw std::invalid_argument("loss must be hinge, log, or hybrid");
  }
  ColumnCorpus train_corpus = read_column_corpus(opt.train_path);
  ColumnCorpus test_corpus = read_column_corpus(opt.test_path);
  if (train_corpus.sentences.empty()) {
    throw std::invalid_argument("training corpus is empty");
  }
  FeatureSpace space;
  std::vector<ChainInstance> train = featurize(train_corpus, space, DictMode::kBuild);
  std::vector<ChainInstance> test = featurize(test_corpus, space, DictMode::kFrozen);

  TrainConfig cfg;
  cfg.lambda = opt.lambda;
  cfg.epochs = opt.epochs;
  cfg.minibatch = opt.minibatch;
  cfg.seed = opt.seed;
  cfg.mode = TrainMode::kStochastic;

  double alpha = 0.0;
  bool selected = false;
  if (opt.loss == "hinge") {
    alpha = 0.0;
  } else if (opt.loss == "log") {
    alpha = 1.0;
  } else if (opt.alpha.has_value()) {
    alpha = *opt.alpha;
  } else {
    // Hold out every fifth sentence and pick alpha by token accuracy.
    std::vector<ChainInstance> fit, held;
    for (std::size_t i = 0; i < train.size(); ++i) {
      (i % 5 == 4 ? held : fit).push_back(train[i]);
    }
    if (fit.empty() || held.empty()) {
      throw std::invalid_argument("training corpus is too small to select alpha");
    }
    const double grid[] = {0.5, 0.7, 0.9, 0.95, 0.99, 1.0};
    double best_acc = -1.0;
    for (double a : grid) {
      TrainConfig sel = cfg;
      sel.alpha = a;
      TrainReport trained = train_chain(fit, space.num_labels(), space.num_features(), sel);
      ChainModel model(space.num_labels(), space.num_features(),
                       std::move(trained.final_weights));
      double acc = token_accuracy(model, held);
      if (acc > best_acc) {
        best_acc = acc;
        alpha = a;
      }
    }
    selected = true;
  }
  cfg.alpha = alpha;

  TrainReport trained = train_chain(train, space.num_labels(), space.num_features(), cfg);
  ChainModel model(space.num_labels(), space.num_features(), trained.final_weights);
  ChunkEval ev = evaluate_chain(model, test, space.label_names);

  if (!opt.model_out.empty()) {
    ModelFile file;
    file.kind = ModelKind::kChain;
    file.num_labels = static_cast<std::uint32_t>(space.num_labels());
    file.num_unary_features = space.num_features();
    file.feature_names = space.feature_names;
    file.label_names = space.label_names;
    file.weights = trained.final_weights;
    save_model(file, opt.model_out);
  }

  ExperimentReport report;
  report.experiment = "chunk";
  report.seed = opt.seed;
  report.config = {{"train", opt.train_path},
                   {"test", opt.test_path},
                   {"loss", opt.loss},
                   {"alpha", fmt(alpha)},
                   {"alpha_selected", selected ? "yes" : "no"},
                   {"lambda", fmt(opt.lambda)},
                   {"epochs", std::to_string(opt.epochs)},
                   {"minibatch", std::to_string(opt.minibatch)}};
  report.columns = {"loss", "alpha", "accuracy", "precision", "recall", "f1"};
  report.add_row({Cell(opt.loss), Cell(alpha), Cell(ev.accuracy), Cell(ev.precision),
                  Cell(ev.recall), Cell(ev.f1)});
  return report;
}

ExperimentReport run_dominance(const DominanceOptions& opt) {
  ModelFile file = load_model(opt.model_path);
  if (file.kind != ModelKind::kChain) {
    throw std::runtime_error("dominance analysis needs a chain model");
  }
  FeatureSpace space;
  space.feature_names = file.feature_names;
  space.feature_ids.clear();
  for (std::size_t i = 0; i < file.feature_names.size(); ++i) {
    space.feature_ids.emplace(file.feature_names[i], static_cast<std::uint32_t>(i));
  }
  space.label_names = file.label_names;
  for (std::size_t i = 0; i < file.label_names.size(); ++i) {
    space.label_ids.emplace(file.label_names[i], static_cast<int>(i));
  }

  ColumnCorpus corpus = read_column_corpus(opt.corpus_path);
  std::vector<ChainInstance> data = featurize(corpus, space, DictMode::kFrozen);
  ChainModel model(file.num_labels, file.num_unary_features, file.weights);

  std::vector<double> gold_probs, max_probs;
  for (const ChainInstance& inst : data) {
    ChainPotentials pot = build_potentials(model, inst);
    double log_z = log_partition(pot);
    gold_probs.push_back(std::exp(pot.labeling_score(inst.gold_labels) - log_z));
    Labeling best = viterbi(pot);
    max_probs.push_back(std::exp(pot.labeling_score(best) - log_z));
  }
  std::sort(gold_probs.begin(), gold_probs.end());
  std::sort(max_probs.begin(), max_probs.end());
  std::size_t non_dominant = 0;
  for (double p : max_probs) non_dominant += (p < 0.5);
  double fraction = max_probs.empty()
                        ? 0.0
                        : static_cast<double>(non_dominant) / static_cast<double>(max_probs.size());

  ExperimentReport report;
  report.experiment = "dominance";
  report.config = {{"model", opt.model_path},
                   {"corpus", opt.corpus_path},
                   {"non_dominant_fraction", fmt(fraction)}};
  report.columns = {"rank", "gold_prob", "max_prob"};
  for (std::size_t i = 0; i < gold_probs.size(); ++i) {
    report.add_row({Cell(static_cast<long long>(i + 1)), Cell(gold_probs[i]),
                    Cell(max_probs[i])});
  }
  return report;
}

LabelDistribution sample_distribution(int k, std::uint64_t& state) {
  if (k < 2) throw std::invalid_argument("need at least two labels");
  while (true) {
    std::vector<double> p(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (double& v : p) {
      double u;
      do {
        u = rngutil::uniform01(state);
      } while (u == 0.0);
      v = -std::log(u);
      sum += v;
    }
    for (double& v : p) v /= sum;
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (sorted[0] - sorted[1] >= 0.02) return LabelDistribution(std::move(p));
  }
}

double sample_alpha_above(const ConsistencyVerdict& verdict, std::uint64_t& state) {
  double lo = std::max(0.0, verdict.threshold);
  double u = rngutil::uniform01(state);
  return lo + (0.05 + 0.95 * u) * (1.0 - lo);
}

ExperimentReport run_consistency(const ConsistencyOptions& opt) {
  if (opt.k_max < 3 || opt.k_max > 8) {
    throw std::invalid_argument("k_max must lie in 3..8");
  }
  if (opt.trials < 0) throw std::invalid_argument("trials must be nonnegative");

  ExperimentReport report;
  report.experiment = "consistency";
  report.seed = opt.seed;
  report.columns = {"trial",     "k",        "alpha",   "threshold", "d_max",
                    "predicted", "observed", "attains", "violation", "status"};

  long long violations = 0;
  long long oracle_failures = 0;
  auto run_trial = [&](const std::string& name, const LabelDistribution& d, double alpha) {
    DominanceStats stats = dominance_stats(d);
    ConsistencyVerdict verdict = alpha_threshold(d);
    HybridParam a(alpha);
    std::vector<Cell> row = {Cell(name),
                             Cell(static_cast<long long>(d.size())),
                             Cell(alpha),
                             Cell(verdict.threshold),
                             Cell(stats.d_max)};
    try {
      AlignmentCheckRecord rec = check_alignment_prediction(d, a);
      FConsistencyRecord probe = probe_f_consistency(d, a);
      bool violation = rec.predicted && !rec.observed;
      violations += violation;
      row.push_back(Cell(static_cast<long long>(rec.predicted)));
      row.push_back(Cell(static_cast<long long>(rec.observed)));
      row.push_back(Cell(static_cast<long long>(probe.attains_min)));
      row.push_back(Cell(static_cast<long long>(violation)));
      row.push_back(Cell(std::string("ok")));
    } catch (const OracleFailure&) {
      ++oracle_failures;
      row.push_back(Cell(std::string("")));
      row.push_back(Cell(std::string("")));
      row.push_back(Cell(std::string("")));
      row.push_back(Cell(std::string("")));
      row.push_back(Cell(std::string("oracle_failure")));
    }
    report.add_row(std::move(row));
  };

  run_trial("witness_hinge_nondominant", LabelDistribution({0.4, 0.3, 0.3}), 0.0);
  run_trial("witness_mixed_nondominant", LabelDistribution({0.46, 0.27, 0.27}), 0.5);
  run_trial("witness_dominant", LabelDistribution({0.6, 0.2, 0.2}), 0.0);

  std::uint64_t state = opt.seed;
  for (int t = 0; t < opt.trials; ++t) {
    int k = 3 + static_cast<int>(rngutil::uniform_below(
                    state, static_cast<std::uint64_t>(opt.k_max - 2)));
    LabelDistribution d = sample_distribution(k, state);
    double alpha;
    if (opt.above_threshold_only) {
      alpha = sample_alpha_above(alpha_threshold(d), state);
    } else {
      alpha = rngutil::uniform01(state);
    }
    run_trial(std::to_string(t + 1), d, alpha);
  }

  report.config = {{"k_max", std::to_string(opt.k_max)},
                   {"trials", std::to_string(opt.trials)},
                   {"above_threshold_only", opt.above_threshold_only ? "yes" : "no"},
                   {"violations", std::to_string(violations)},
                   {"oracle_failures", std::to_string(oracle_failures)}};
  return report;
}

}  // namespace hybridloss
