#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hybridloss/experiments.hpp"

namespace {

void emit(const hybridloss::ExperimentReport& report, const std::string& out, bool json) {
  if (out.empty()) {
    std::cout << (json ? report.to_json() : report.to_csv());
  } else {
    report.write(out, json);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid log/hinge loss toolkit"};
  app.require_subcommand(1);

  std::string out;
  bool json = false;

  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "write the report to this path (default: stdout)");
    cmd->add_flag("--json", json, "emit JSON instead of CSV");
  };

  hybridloss::Exp1Options exp1;
  CLI::App* cmd_exp1 = app.add_subcommand("exp1", "non-dominant error vs class count");
  cmd_exp1->add_option("--alpha", exp1.alpha, "hybrid mixing weight")->check(CLI::Range(0.0, 1.0));
  cmd_exp1->add_option("--lambda", exp1.lambda, "L2 regularization weight");
  cmd_exp1->add_option("--k-min", exp1.k_min, "smallest class count");
  cmd_exp1->add_option("--k-max", exp1.k_max, "largest class count");
  cmd_exp1->add_option("--epochs", exp1.epochs, "training epochs");
  cmd_exp1->add_option("--seed", exp1.seed, "RNG seed");
  add_output(cmd_exp1);

  hybridloss::Exp2Options exp2;
  std::optional<double> exp2_lambda, exp2_alpha;
  CLI::App* cmd_exp2 = app.add_subcommand("exp2", "dominant/non-dominant mixture sweep");
  cmd_exp2->add_option("--epochs", exp2.epochs, "training epochs");
  cmd_exp2->add_option("--seed", exp2.seed, "RNG seed");
  cmd_exp2->add_option("--lambda", exp2_lambda, "fix lambda instead of the default grid");
  cmd_exp2->add_option("--alpha", exp2_alpha, "fix the hybrid alpha instead of the default grid")
      ->check(CLI::Range(0.0, 1.0));
  add_output(cmd_exp2);

  hybridloss::ChunkOptions chunk;
  std::optional<double> chunk_alpha;
  CLI::App* cmd_chunk = app.add_subcommand("chunk", "train and evaluate a chunking model");
  cmd_chunk->add_option("--train", chunk.train_path, "training corpus")->required();
  cmd_chunk->add_option("--test", chunk.test_path, "test corpus")->required();
  cmd_chunk->add_option("--loss", chunk.loss, "hinge, log, or hybrid");
  cmd_chunk->add_option("--alpha", chunk_alpha, "hybrid alpha (selected on a split if omitted)")
      ->check(CLI::Range(0.0, 1.0));
  cmd_chunk->add_option("--lambda", chunk.lambda, "L2 regularization weight");
  cmd_chunk->add_option("--epochs", chunk.epochs, "training epochs");
  cmd_chunk->add_option("--minibatch", chunk.minibatch, "mini-batch size");
  cmd_chunk->add_option("--seed", chunk.seed, "RNG seed");
  cmd_chunk->add_option("--model-out", chunk.model_out, "save the trained model here");
  add_output(cmd_chunk);

  hybridloss::DominanceOptions dominance;
  std::uint64_t dominance_seed = 0;
  CLI::App* cmd_dom = app.add_subcommand("dominance", "sequence probability analysis");
  cmd_dom->add_option("--model", dominance.model_path, "trained chain model")->required();
  cmd_dom->add_option("--corpus", dominance.corpus_path, "corpus to analyze")->required();
  cmd_dom->add_option("--seed", dominance_seed, "RNG seed (unused, echoed)");
  add_output(cmd_dom);

  hybridloss::ConsistencyOptions consistency;
  CLI::App* cmd_cons = app.add_subcommand("consistency", "threshold sufficiency trials");
  cmd_cons->add_option("--k-max", consistency.k_max, "largest label count");
  cmd_cons->add_option("--trials", consistency.trials, "number of random trials");
  cmd_cons->add_option("--seed", consistency.seed, "RNG seed");
  cmd_cons->add_flag("--above-threshold", consistency.above_threshold_only,
                     "sample alpha strictly above the predicted threshold");
  add_output(cmd_cons);

  int gen_sentences = 200;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  CLI::App* cmd_gen = app.add_subcommand("gencorpus", "write a synthetic chunking corpus");
  cmd_gen->add_option("--sentences", gen_sentences, "number of sentences");
  cmd_gen->add_option("--seed", gen_seed, "RNG seed");
  cmd_gen->add_option("--out", gen_out, "output corpus path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_exp1->parsed()) {
      emit(hybridloss::run_exp1(exp1), out, json);
    } else if (cmd_exp2->parsed()) {
      if (exp2_lambda) exp2.lambda_grid = {*exp2_lambda};
      if (exp2_alpha) exp2.alpha_grid = {*exp2_alpha};
      emit(hybridloss::run_exp2(exp2), out, json);
    } else if (cmd_chunk->parsed()) {
      if (chunk_alpha) chunk.alpha = *chunk_alpha;
      emit(hybridloss::run_chunk(chunk), out, json);
    } else if (cmd_dom->parsed()) {
      emit(hybridloss::run_dominance(dominance), out, json);
    } else if (cmd_cons->parsed()) {
      hybridloss::ExperimentReport report = hybridloss::run_consistency(consistency);
      emit(report, out, json);
      for (const auto& [key, value] : report.config) {
        if ((key == "violations" || key == "oracle_failures") && value != "0") {
          std::cerr << "consistency: " << key << " = " << value << "\n";
          return 1;
        }
      }
    } else if (cmd_gen->parsed()) {
      hybridloss::write_column_corpus(hybridloss::gen_chunk_corpus(gen_sentences, gen_seed),
                                      gen_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
