#include "hybridloss/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hybridloss {

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::string lowercased(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

FeatureSpace::FeatureSpace() {
  feature_names.push_back("__OOV__");
  feature_ids.emplace("__OOV__", 0);
}

ColumnCorpus parse_column_corpus(const std::string& text) {
  ColumnCorpus corpus;
  std::vector<Token> current;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) {
      if (!current.empty()) {
        corpus.sentences.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    std::istringstream row(line);
    Token tok;
    std::string extra;
    if (!(row >> tok.word >> tok.pos >> tok.tag) || (row >> extra)) {
      throw ParseError("expected 3 whitespace-separated columns", line_no);
    }
    current.push_back(std::move(tok));
  }
  if (!current.empty()) corpus.sentences.push_back(std::move(current));
  return corpus;
}

ColumnCorpus read_column_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_column_corpus(buf.str());
}

void write_column_corpus(const ColumnCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  for (const std::vector<Token>& sentence : corpus.sentences) {
    for (const Token& tok : sentence) {
      out << tok.word << ' ' << tok.pos << ' ' << tok.tag << '\n';
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed to write corpus file: " + path);
}

namespace {

// Token template: identity/lowercase/affixes/POS for the focus token and
// word/POS identities in a 2-token window, with boundary padding.
std::vector<std::string> token_features(const std::vector<Token>& sentence, std::size_t j) {
  std::vector<std::string> feats;
  const std::string& word = sentence[j].word;
  feats.push_back("low=" + lowercased(word));
  for (std::size_t n = 1; n <= 3 && n <= word.size(); ++n) {
    feats.push_back("pre" + std::to_string(n) + "=" + word.substr(0, n));
    feats.push_back("suf" + std::to_string(n) + "=" + word.substr(word.size() - n));
  }
  for (int off = -2; off <= 2; ++off) {
    std::string w = "__BOS__";
    std::string p = "__BOS__";
    long pos = static_cast<long>(j) + off;
    if (pos >= static_cast<long>(sentence.size())) {
      w = "__EOS__";
      p = "__EOS__";
    } else if (pos >= 0) {
      w = sentence[static_cast<std::size_t>(pos)].word;
      p = sentence[static_cast<std::size_t>(pos)].pos;
    }
    feats.push_back("w[" + std::to_string(off) + "]=" + w);
    feats.push_back("pos[" + std::to_string(off) + "]=" + p);
  }
  return feats;
}

}  // namespace

std::vector<ChainInstance> featurize(const ColumnCorpus& corpus, FeatureSpace& space,
                                     DictMode mode) {
  std::vector<ChainInstance> out;
  out.reserve(corpus.sentences.size());
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const std::vector<Token>& sentence = corpus.sentences[s];
    ChainInstance inst;
    inst.unary_features.reserve(sentence.size());
    inst.gold_labels.reserve(sentence.size());
    for (std::size_t j = 0; j < sentence.size(); ++j) {
      std::set<std::uint32_t> ids;
      for (const std::string& name : token_features(sentence, j)) {
        auto it = space.feature_ids.find(name);
        if (it != space.feature_ids.end()) {
          ids.insert(it->second);
        } else if (mode == DictMode::kBuild) {
          auto fresh = static_cast<std::uint32_t>(space.feature_names.size());
          space.feature_names.push_back(name);
          space.feature_ids.emplace(name, fresh);
          ids.insert(fresh);
        } else {
          ids.insert(0);  // OOV slot
        }
      }
      std::vector<FeatureEntry> entries;
      entries.reserve(ids.size());
      for (std::uint32_t id : ids) entries.push_back({id, 1.0});
      inst.unary_features.emplace_back(std::move(entries));

      const std::string& tag = sentence[j].tag;
      auto lt = space.label_ids.find(tag);
      if (lt != space.label_ids.end()) {
        inst.gold_labels.push_back(lt->second);
      } else if (mode == DictMode::kBuild) {
        int fresh = static_cast<int>(space.label_names.size());
        space.label_names.push_back(tag);
        space.label_ids.emplace(tag, fresh);
        inst.gold_labels.push_back(fresh);
      } else {
        throw ParseError("unknown label '" + tag + "' with a frozen dictionary", s + 1);
      }
    }
    out.push_back(std::move(inst));
  }
  return out;
}

MulticlassDataset gen_exp1(int k) {
  if (k < 3 || k > 10) throw std::invalid_argument("gen_exp1 supports k in 3..10");
  MulticlassDataset data;
  data.num_labels = static_cast<std::size_t>(k);
  data.feature_dim = 2;
  SparseFeatureVector x({{0, 1.0}, {1, 1.0}});
  for (int y = 0; y < k; ++y) {
    MulticlassExample ex;
    ex.features = x;
    ex.label = y;
    ex.weight = (y == 0) ? 0.46 : 0.54 / static_cast<double>(k - 1);
    data.examples.push_back(std::move(ex));
  }
  return data;
}

namespace {

constexpr int kExp2Labels = 5;
constexpr std::size_t kExp2Dim = 100;

MulticlassExample draw_exp2_example(double rho, std::uint64_t& state) {
  MulticlassExample ex;
  std::vector<FeatureEntry> entries;
  entries.reserve(kExp2Dim + 1);
  // Coordinate values carry a 1/100 factor so per-example scores stay
  // O(1); the class means would otherwise sum to the hundreds and
  // first-order training would crawl.
  if (rngutil::uniform01(state) < rho) {
    // Shared constant observation with label weights (0.4, 0.15 x 4).
    for (std::uint32_t i = 0; i < kExp2Dim; ++i) entries.push_back({i, 0.001});
    double u = rngutil::uniform01(state);
    ex.label = (u < 0.4) ? 0 : 1 + static_cast<int>((u - 0.4) / 0.15);
    if (ex.label > 4) ex.label = 4;
  } else {
    ex.label = static_cast<int>(rngutil::uniform_below(state, kExp2Labels));
    double mean = 1.0 + static_cast<double>(ex.label);
    for (std::uint32_t i = 0; i < kExp2Dim; ++i) {
      double v = (mean + 0.6 * rngutil::normal(state)) / 100.0;
      if (v == 0.0) v = 1e-12;  // keep the sparse-vector nonzero invariant
      entries.push_back({i, v});
    }
  }
  entries.push_back({kExp2Dim, 1.0});  // per-class intercept coordinate
  ex.features = SparseFeatureVector(std::move(entries));
  return ex;
}

MulticlassDataset draw_exp2_dataset(double rho, int m, std::uint64_t& state) {
  MulticlassDataset data;
  data.num_labels = kExp2Labels;
  data.feature_dim = kExp2Dim + 1;
  data.examples.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) data.examples.push_back(draw_exp2_example(rho, state));
  return data;
}

}  // namespace

Exp2Data gen_exp2(double rho, int m, std::uint64_t seed) {
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must lie in [0, 1]");
  if (m < 1) throw std::invalid_argument("m must be positive");
  std::uint64_t state = seed;
  Exp2Data data;
  data.train = draw_exp2_dataset(rho, m, state);
  data.validation = draw_exp2_dataset(rho, 1000, state);
  data.test = draw_exp2_dataset(rho, 1000, state);
  return data;
}

namespace {

struct TagVocab {
  const char* tag;
  std::vector<const char*> words;
  std::vector<const char*> pos;
};

const std::vector<TagVocab>& chunk_vocab() {
  static const std::vector<TagVocab> vocab = {
      {"O",
       {"the", "a", "an", "of", "in", "on", "for", "with", "by", "at", "as",
        "and", "but", "or", "yesterday", "today", "sharply", "slightly",
        "again", "still", ",", "about", "over", "under", "after"},
       {"DT", "IN", "RB", "CC"}},
      {"B-NP",
       {"market", "price", "company", "report", "sales", "profit", "index",
        "share", "bank", "rate", "growth", "deal", "plan", "offer", "stake",
        "unit", "group", "fund", "bond", "stock", "Acme", "Delta", "Orion",
        "Vertex", "Calder"},
       {"NN", "NNS", "NNP"}},
      {"I-NP",
       {"holdings", "systems", "industries", "securities", "shares", "prices",
        "figures", "margins", "results", "costs", "earnings", "revenues",
        "segment", "division", "percent"},
       {"NN", "NNS"}},
      {"B-VP",
       {"rose", "fell", "said", "gained", "dropped", "reported", "announced",
        "climbed", "slipped", "surged", "declined", "posted", "expects",
        "plans", "agreed"},
       {"VBD", "VBZ"}},
      {"I-VP",
       {"be", "been", "being", "have", "has", "had", "expected", "rising",
        "falling", "holding", "buying", "selling"},
       {"VB", "VBN", "VBG"}},
  };
  return vocab;
}

// Transition rows over (O, B-NP, I-NP, B-VP, I-VP); I-X is reachable only
// from B-X or I-X so every sampled sequence is valid BIO.
const double kChunkInit[5] = {0.30, 0.55, 0.0, 0.15, 0.0};
const double kChunkTrans[5][5] = {
    {0.30, 0.45, 0.00, 0.25, 0.00},
    {0.20, 0.15, 0.40, 0.25, 0.00},
    {0.25, 0.15, 0.30, 0.30, 0.00},
    {0.30, 0.40, 0.00, 0.00, 0.30},
    {0.35, 0.45, 0.00, 0.00, 0.20},
};

int sample_index(const double* probs, int n, std::uint64_t& state) {
  double u = rngutil::uniform01(state);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace

ColumnCorpus gen_chunk_corpus(int num_sentences, std::uint64_t seed) {
  if (num_sentences < 1) throw std::invalid_argument("need at least one sentence");
  const std::vector<TagVocab>& vocab = chunk_vocab();
  std::uint64_t state = seed;
  ColumnCorpus corpus;
  corpus.sentences.reserve(static_cast<std::size_t>(num_sentences));
  for (int s = 0; s < num_sentences; ++s) {
    std::size_t length = 6 + rngutil::uniform_below(state, 10);
    std::vector<Token> sentence;
    sentence.reserve(length + 1);
    int tag = sample_index(kChunkInit, 5, state);
    for (std::size_t j = 0; j < length; ++j) {
      // A 2% leak draws the word from another tag's pool so the mapping
      // from words to tags is learnable but not purely deterministic.
      int pool = tag;
      if (rngutil::uniform01(state) < 0.02) {
        pool = static_cast<int>(rngutil::uniform_below(state, 5));
      }
      const TagVocab& tv = vocab[static_cast<std::size_t>(pool)];
      Token tok;
      tok.word = tv.words[rngutil::uniform_below(state, tv.words.size())];
      tok.pos = tv.pos[rngutil::uniform_below(state, tv.pos.size())];
      tok.tag = vocab[static_cast<std::size_t>(tag)].tag;
      sentence.push_back(std::move(tok));
      tag = sample_index(kChunkTrans[tag], 5, state);
    }
    sentence.push_back({".", ".", "O"});
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

namespace {

struct Chunk {
  std::size_t begin;
  std::size_t end;  // inclusive
  std::string type;

  bool operator==(const Chunk& other) const = default;
};

void check_tag(const std::string& tag) {
  if (tag == "O") return;
  if (tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') return;
  throw std::invalid_argument("malformed BIO tag: '" + tag + "'");
}

// Maximal B-X I-X... spans; a stray I-X (after O or a different type)
// starts a new chunk, matching the usual CoNLL evaluation behavior.
std::vector<Chunk> extract_chunks(const std::vector<std::string>& tags) {
  std::vector<Chunk> chunks;
  for (std::size_t j = 0; j < tags.size(); ++j) {
    check_tag(tags[j]);
    if (tags[j] == "O") continue;
    std::string type = tags[j].substr(2);
    bool continues = tags[j][0] == 'I' && !chunks.empty() &&
                     chunks.back().end + 1 == j && chunks.back().type == type;
    if (continues) {
      chunks.back().end = j;
    } else {
      chunks.push_back({j, j, type});
    }
  }
  return chunks;
}

}  // namespace

ChunkMetrics chunk_metrics(const std::vector<std::string>& gold,
                           const std::vector<std::string>& predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("gold and predicted tag sequences differ in length");
  }
  ChunkMetrics m;
  if (!gold.empty()) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < gold.size(); ++j) hits += (gold[j] == predicted[j]);
    m.accuracy = 100.0 * static_cast<double>(hits) / static_cast<double>(gold.size());
  }
  std::vector<Chunk> gold_chunks = extract_chunks(gold);
  std::vector<Chunk> pred_chunks = extract_chunks(predicted);
  std::size_t correct = 0;
  for (const Chunk& c : pred_chunks) {
    if (std::find(gold_chunks.begin(), gold_chunks.end(), c) != gold_chunks.end()) {
      ++correct;
    }
  }
  if (!pred_chunks.empty()) {
    m.precision = 100.0 * static_cast<double>(correct) / static_cast<double>(pred_chunks.size());
  }
  if (!gold_chunks.empty()) {
    m.recall = 100.0 * static_cast<double>(correct) / static_cast<double>(gold_chunks.size());
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

namespace {

constexpr char kModelMagic[8] = {'H', 'Y', 'B', 'L', 'M', 'D', 'L', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

struct ByteReader {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw std::runtime_error("truncated model file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    }
    pos += 8;
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void save_model(const ModelFile& model, const std::string& path) {
  std::string body;
  body.append(kModelMagic, sizeof(kModelMagic));
  put_u32(body, model.version);
  body.push_back(static_cast<char>(model.kind));
  put_u32(body, model.num_labels);
  put_u64(body, model.num_unary_features);
  put_u64(body, model.feature_names.size());
  for (const std::string& s : model.feature_names) put_string(body, s);
  put_u64(body, model.label_names.size());
  for (const std::string& s : model.label_names) put_string(body, s);
  put_u64(body, model.weights.size());
  for (double w : model.weights) put_u64(body, std::bit_cast<std::uint64_t>(w));
  put_u64(body, fnv1a(body));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("failed to write model file: " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  if (bytes.size() < sizeof(kModelMagic) + 8) throw std::runtime_error("truncated model file");

  std::string body = bytes.substr(0, bytes.size() - 8);
  ByteReader tail{bytes, bytes.size() - 8};
  if (tail.u64() != fnv1a(body)) throw std::runtime_error("model checksum mismatch");

  ByteReader r{body};
  r.need(sizeof(kModelMagic));
  if (body.compare(0, sizeof(kModelMagic), kModelMagic, sizeof(kModelMagic)) != 0) {
    throw std::runtime_error("not a model file (bad magic)");
  }
  r.pos = sizeof(kModelMagic);

  ModelFile model;
  model.version = r.u32();
  if (model.version != 1) {
    throw std::runtime_error("unsupported model version " + std::to_string(model.version));
  }
  r.need(1);
  unsigned char kind = static_cast<unsigned char>(body[r.pos++]);
  if (kind > 1) throw std::runtime_error("unknown model kind");
  model.kind = static_cast<ModelKind>(kind);
  model.num_labels = r.u32();
  model.num_unary_features = r.u64();
  std::uint64_t n_features = r.u64();
  model.feature_names.reserve(n_features);
  for (std::uint64_t i = 0; i < n_features; ++i) model.feature_names.push_back(r.str());
  std::uint64_t n_labels = r.u64();
  model.label_names.reserve(n_labels);
  for (std::uint64_t i = 0; i < n_labels; ++i) model.label_names.push_back(r.str());
  std::uint64_t n_weights = r.u64();
  model.weights.reserve(n_weights);
  for (std::uint64_t i = 0; i < n_weights; ++i) {
    model.weights.push_back(std::bit_cast<double>(r.u64()));
  }
  if (r.pos != body.size()) throw std::runtime_error("trailing bytes in model file");
  return model;
}

}  // namespace hybridloss
