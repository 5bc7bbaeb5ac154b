#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "hybridloss/train.hpp"

namespace hybridloss {

/// Parse failure with the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Token {
  std::string word;
  std::string pos;
  std::string tag;
};

/// Sentences of (word, POS, chunk tag) rows, blank-line separated.
struct ColumnCorpus {
  std::vector<std::vector<Token>> sentences;
};

ColumnCorpus read_column_corpus(const std::string& path);
ColumnCorpus parse_column_corpus(const std::string& text);
void write_column_corpus(const ColumnCorpus& corpus, const std::string& path);

/// Feature and label dictionaries built on a training split. Id 0 is the
/// reserved out-of-vocabulary feature; in frozen mode unseen feature
/// strings map to it, and ids are stable under re-featurization.
struct FeatureSpace {
  std::vector<std::string> feature_names;  // id -> name; [0] is the OOV slot
  std::unordered_map<std::string, std::uint32_t> feature_ids;
  std::vector<std::string> label_names;
  std::unordered_map<std::string, int> label_ids;

  FeatureSpace();
  std::size_t num_features() const { return feature_names.size(); }
  std::size_t num_labels() const { return label_names.size(); }
};

enum class DictMode { kBuild, kFrozen };

/// Turns a corpus into chain instances with the built-in token template:
/// word identity, lowercased word, prefixes and suffixes of lengths 1-3,
/// POS tag, and word/POS identities at offsets -2..+2 with boundary
/// padding. In frozen mode an unseen label raises ParseError.
std::vector<ChainInstance> featurize(const ColumnCorpus& corpus, FeatureSpace& space,
                                     DictMode mode);

/// Weighted one-observation dataset: a constant feature vector (1, 1),
/// label 0 carrying weight 0.46 and the rest sharing 0.54 equally, so
/// the weighted empirical risk is exactly the population risk.
MulticlassDataset gen_exp1(int k);

struct Exp2Data {
  MulticlassDataset train;
  MulticlassDataset validation;
  MulticlassDataset test;
};

/// Mixture generator over 5 labels. Each instance is non-dominant with
/// probability rho: those share one constant vector over the first 100
/// coordinates and draw the label from (0.4, 0.15, 0.15, 0.15, 0.15);
/// the rest draw a uniform label y and 100 coordinates from
/// Normal(1 + y, 0.6). All coordinate values carry a 1/100 factor to
/// keep scores O(1), and coordinate 100 is a constant 1 on every
/// instance, giving each class an intercept; without it no linear
/// scorer can separate classes that differ only in overall scale.
/// Validation and test sets have 1000 instances each. Deterministic in
/// the seed.
Exp2Data gen_exp2(double rho, int m, std::uint64_t seed);

/// Synthetic BIO chunking sentences sampled from a fixed Markov chain
/// over {O, B-NP, I-NP, B-VP, I-VP} with mostly tag-specific vocabulary,
/// so gold tags are recoverable from the token template.
ColumnCorpus gen_chunk_corpus(int num_sentences, std::uint64_t seed);

struct ChunkMetrics {
  double accuracy = 0.0;  // percent, token level
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Token accuracy plus chunk precision/recall/F1 in percent. A chunk is
/// a maximal B-X followed by I-X... span; empty denominators yield 0.
/// Throws on length mismatch or a malformed tag.
ChunkMetrics chunk_metrics(const std::vector<std::string>& gold,
                           const std::vector<std::string>& predicted);

enum class ModelKind : std::uint8_t { kMulticlass = 0, kChain = 1 };

/// Versioned binary model container: weights, feature dictionary, and
/// label alphabet with a trailing checksum. Round-trips bit-exactly.
struct ModelFile {
  std::uint32_t version = 1;
  ModelKind kind = ModelKind::kChain;
  std::uint32_t num_labels = 0;
  std::uint64_t num_unary_features = 0;  // feature dim for multiclass
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;
  WeightVector weights;
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace hybridloss
