#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "msgcn/core/error.hpp"

namespace msgcn {

inline constexpr int kUnlabelled = -1;

enum class TokenizerMode { kEnglish, kPretokenized };

struct Document {
  int id = 0;
  std::vector<int> tokens;   // vocabulary ids, all < vocab size
  int label = kUnlabelled;   // class id, or kUnlabelled
  std::string raw_text;      // original line, kept for reporting only
};

// Frequency-filtered vocabulary. Ids are assigned in descending corpus
// frequency, ties broken lexicographically, so every downstream matrix is
// deterministic.
class Vocabulary {
 public:
  Vocabulary() = default;

  int size() const { return static_cast<int>(id_to_token_.size()); }
  int min_count() const { return min_count_; }

  int id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? -1 : it->second;
  }
  const std::string& token(int id) const { return id_to_token_[id]; }
  long frequency(int id) const { return frequency_[id]; }
  const std::vector<std::string>& tokens() const { return id_to_token_; }
  const std::vector<long>& frequencies() const { return frequency_; }

  static Vocabulary build(const std::vector<std::vector<std::string>>& docs,
                          int min_count);
  static Vocabulary from_parts(std::vector<std::string> tokens,
                               std::vector<long> frequencies, int min_count);

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::vector<long> frequency_;
  int min_count_ = 0;
};

struct SplitAssignment {
  std::vector<int> train_ids;
  std::vector<int> val_ids;
  std::vector<int> test_ids;
  std::uint64_t seed = 0;
  double label_ratio = 0.0;
};

struct Corpus {
  std::vector<Document> docs;
  Vocabulary vocab;
  std::vector<std::string> class_names;  // interned in first-appearance order
  SplitAssignment splits;                // empty until make_splits runs

  int num_docs() const { return static_cast<int>(docs.size()); }
  int num_words() const { return vocab.size(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
};

std::vector<std::string> tokenize(const std::string& text, TokenizerMode mode);

// Exactly the tokens with corpus frequency strictly greater than min_count
// survive. Throws AllTokensFiltered when nothing survives.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs,
                       int min_count = 5);

struct CorpusOptions {
  TokenizerMode tokenizer = TokenizerMode::kEnglish;
  int min_count = 5;
  bool quiet = false;
};

// Tokenizes, filters, drops documents left empty (with a warning), and
// interns label strings to class ids in first-appearance order. An empty
// label string marks a document as unlabelled.
Corpus build_corpus(const std::vector<std::string>& texts,
                    const std::vector<std::string>& labels,
                    const CorpusOptions& options);

// Reads either a directory holding docs.txt + labels.txt or a single TSV
// file with `label<TAB>text` lines.
Corpus load_dataset(const std::string& path, const CorpusOptions& options);

void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

struct SplitOptions {
  double label_ratio = 0.01;
  double val_fraction = 0.10;
  std::uint64_t seed = 0;
};

// Stratified labelled-pool sampling: per-class train counts track the corpus
// class proportions within rounding, with at least one train document per
// class; the validation set is carved from the pool at val_fraction.
SplitAssignment make_splits(const Corpus& corpus, const SplitOptions& options);

struct SyntheticOptions {
  int classes = 3;
  int docs_per_class = 100;
  int vocab_per_class = 20;
  int shared_vocab = 10;
  int doc_length = 30;
  std::uint64_t seed = 0;
  // Probability that a token position draws from the class-exclusive pool
  // rather than the shared pool (when a shared pool exists).
  double class_token_fraction = 0.5;
};

// Desk-scale fixture: each class mixes a class-exclusive token pool with a
// shared pool. Deterministic from the seed; vocabulary built with
// min_count = 0 so every generated token is retained.
Corpus generate_synthetic(const SyntheticOptions& options);

}  // namespace msgcn
