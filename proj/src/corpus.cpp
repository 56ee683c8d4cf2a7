#include "msgcn/corpus/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "msgcn/core/io.hpp"
#include "msgcn/core/rng.hpp"

namespace msgcn {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> tokenize(const std::string& text, TokenizerMode mode) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(current);
      current.clear();
    }
  };
  if (mode == TokenizerMode::kPretokenized) {
    for (unsigned char ch : text) {
      if (std::isspace(ch)) {
        flush();
      } else {
        current.push_back(static_cast<char>(ch));
      }
    }
    flush();
    return out;
  }
  // English mode: lowercase; a token is a maximal run of ASCII alphanumerics
  // or non-ASCII bytes (multi-byte UTF-8 stays intact). ASCII punctuation and
  // whitespace separate tokens.
  for (unsigned char ch : text) {
    if (ch >= 0x80 || std::isalnum(ch)) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& docs,
                             int min_count) {
  std::unordered_map<std::string, long> counts;
  for (const auto& doc : docs) {
    for (const auto& tok : doc) ++counts[tok];
  }
  std::vector<std::pair<std::string, long>> retained;
  retained.reserve(counts.size());
  for (auto& [tok, n] : counts) {
    if (n > min_count) retained.emplace_back(tok, n);
  }
  if (retained.empty()) {
    throw Error(ErrorCode::kAllTokensFiltered,
                "no token occurs more than " + std::to_string(min_count) +
                    " times; lower min_count");
  }
  std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  v.min_count_ = min_count;
  v.id_to_token_.reserve(retained.size());
  v.frequency_.reserve(retained.size());
  for (auto& [tok, n] : retained) {
    v.token_to_id_.emplace(tok, static_cast<int>(v.id_to_token_.size()));
    v.id_to_token_.push_back(tok);
    v.frequency_.push_back(n);
  }
  return v;
}

Vocabulary Vocabulary::from_parts(std::vector<std::string> tokens,
                                  std::vector<long> frequencies,
                                  int min_count) {
  Vocabulary v;
  v.min_count_ = min_count;
  v.id_to_token_ = std::move(tokens);
  v.frequency_ = std::move(frequencies);
  for (int i = 0; i < v.size(); ++i) v.token_to_id_.emplace(v.id_to_token_[i], i);
  return v;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs,
                       int min_count) {
  return Vocabulary::build(docs, min_count);
}

Corpus build_corpus(const std::vector<std::string>& texts,
                    const std::vector<std::string>& labels,
                    const CorpusOptions& options) {
  if (texts.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "document and label counts differ (" +
                    std::to_string(texts.size()) + " vs " +
                    std::to_string(labels.size()) + ")");
  }
  std::vector<std::vector<std::string>> token_docs;
  token_docs.reserve(texts.size());
  for (const auto& text : texts) token_docs.push_back(tokenize(text, options.tokenizer));

  Corpus corpus;
  corpus.vocab = Vocabulary::build(token_docs, options.min_count);

  // Intern labels in first-appearance order over the raw input, before any
  // document is dropped.
  std::unordered_map<std::string, int> class_ids;
  std::vector<int> label_ids(labels.size(), kUnlabelled);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty()) continue;
    auto [it, inserted] =
        class_ids.emplace(labels[i], static_cast<int>(corpus.class_names.size()));
    if (inserted) corpus.class_names.push_back(labels[i]);
    label_ids[i] = it->second;
  }

  int dropped = 0;
  for (std::size_t i = 0; i < token_docs.size(); ++i) {
    Document doc;
    doc.tokens.reserve(token_docs[i].size());
    for (const auto& tok : token_docs[i]) {
      int id = corpus.vocab.id(tok);
      if (id >= 0) doc.tokens.push_back(id);
    }
    if (doc.tokens.empty()) {
      ++dropped;
      continue;
    }
    doc.id = static_cast<int>(corpus.docs.size());
    doc.label = label_ids[i];
    doc.raw_text = texts[i];
    corpus.docs.push_back(std::move(doc));
  }
  if (dropped > 0 && !options.quiet) {
    std::cerr << "warning: dropped " << dropped
              << " document(s) left empty by vocabulary filtering\n";
  }
  if (corpus.docs.empty()) {
    throw Error(ErrorCode::kAllTokensFiltered,
                "every document became empty after filtering");
  }
  return corpus;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

Corpus load_dataset(const std::string& path, const CorpusOptions& options) {
  std::vector<std::string> texts;
  std::vector<std::string> labels;
  if (fs::is_directory(path)) {
    texts = read_lines((fs::path(path) / "docs.txt").string());
    labels = read_lines((fs::path(path) / "labels.txt").string());
  } else {
    for (const auto& line : read_lines(path)) {
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error(ErrorCode::kIo, "TSV line without tab: " + line);
      }
      labels.push_back(line.substr(0, tab));
      texts.push_back(line.substr(tab + 1));
    }
  }
  return build_corpus(texts, labels, options);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  json j;
  j["vocab"] = {{"tokens", corpus.vocab.tokens()},
                {"frequency", corpus.vocab.frequencies()},
                {"min_count", corpus.vocab.min_count()}};
  json docs = json::array();
  json labels = json::array();
  for (const auto& d : corpus.docs) {
    docs.push_back(d.tokens);
    labels.push_back(d.label);
  }
  j["docs"] = std::move(docs);
  j["labels"] = std::move(labels);
  j["class_names"] = corpus.class_names;
  j["splits"] = {{"train", corpus.splits.train_ids},
                 {"val", corpus.splits.val_ids},
                 {"test", corpus.splits.test_ids},
                 {"seed", corpus.splits.seed},
                 {"label_ratio", corpus.splits.label_ratio}};
  atomic_write(path, j.dump(2) + "\n");
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  json j = json::parse(in);
  Corpus corpus;
  corpus.vocab = Vocabulary::from_parts(
      j["vocab"]["tokens"].get<std::vector<std::string>>(),
      j["vocab"]["frequency"].get<std::vector<long>>(),
      j["vocab"]["min_count"].get<int>());
  const auto& docs = j["docs"];
  const auto& labels = j["labels"];
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Document d;
    d.id = static_cast<int>(i);
    d.tokens = docs[i].get<std::vector<int>>();
    d.label = labels[i].get<int>();
    corpus.docs.push_back(std::move(d));
  }
  corpus.class_names = j["class_names"].get<std::vector<std::string>>();
  corpus.splits.train_ids = j["splits"]["train"].get<std::vector<int>>();
  corpus.splits.val_ids = j["splits"]["val"].get<std::vector<int>>();
  corpus.splits.test_ids = j["splits"]["test"].get<std::vector<int>>();
  corpus.splits.seed = j["splits"]["seed"].get<std::uint64_t>();
  corpus.splits.label_ratio = j["splits"]["label_ratio"].get<double>();
  return corpus;
}

namespace {

// Largest-remainder apportionment of `total` across weights, honouring
// per-class lower and upper bounds. Deterministic: remainder ties go to the
// lower class index.
std::vector<int> apportion(long total, const std::vector<double>& weights,
                           const std::vector<int>& lo,
                           const std::vector<int>& hi) {
  const int n = static_cast<int>(weights.size());
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  std::vector<int> out(n, 0);
  std::vector<double> target(n, 0.0);
  long assigned = 0;
  for (int i = 0; i < n; ++i) {
    target[i] = wsum > 0.0 ? total * weights[i] / wsum : 0.0;
    out[i] = std::clamp(static_cast<int>(std::floor(target[i])), lo[i], hi[i]);
    assigned += out[i];
  }
  // Adjust up (largest remainder first) or down (smallest remainder first)
  // until the total matches; bounds always win over proportionality.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  while (assigned != total) {
    bool add = assigned < total;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      double ra = target[a] - out[a];
      double rb = target[b] - out[b];
      return add ? ra > rb : ra < rb;
    });
    bool moved = false;
    for (int i : order) {
      if (add && out[i] < hi[i]) {
        ++out[i];
        ++assigned;
        moved = true;
        break;
      }
      if (!add && out[i] > lo[i]) {
        --out[i];
        --assigned;
        moved = true;
        break;
      }
    }
    if (!moved) break;  // bounds make the total infeasible; caller handles
  }
  return out;
}

}  // namespace

SplitAssignment make_splits(const Corpus& corpus, const SplitOptions& options) {
  const int num_classes = corpus.num_classes();
  if (num_classes == 0) {
    throw Error(ErrorCode::kClassTooSmall, "corpus has no labelled documents");
  }
  std::vector<std::vector<int>> by_class(num_classes);
  long n_labelled = 0;
  for (const auto& d : corpus.docs) {
    if (d.label == kUnlabelled) continue;
    by_class[d.label].push_back(d.id);
    ++n_labelled;
  }
  for (int c = 0; c < num_classes; ++c) {
    if (by_class[c].empty()) {
      throw Error(ErrorCode::kClassTooSmall,
                  "class '" + corpus.class_names[c] +
                      "' cannot contribute a train document");
    }
  }

  long pool_total = std::lround(options.label_ratio * n_labelled);
  pool_total = std::clamp(pool_total, static_cast<long>(num_classes), n_labelled);
  std::vector<double> weights(num_classes);
  std::vector<int> lo(num_classes, 1), hi(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    weights[c] = static_cast<double>(by_class[c].size());
    hi[c] = static_cast<int>(by_class[c].size());
  }
  std::vector<int> pool_quota = apportion(pool_total, weights, lo, hi);
  long pool_actual = 0;
  for (int q : pool_quota) pool_actual += q;

  long val_total = std::lround(options.val_fraction * pool_actual);
  // Every class keeps at least one train document.
  val_total = std::clamp(val_total, 0L, pool_actual - num_classes);
  long train_total = pool_actual - val_total;
  std::vector<int> train_hi = pool_quota;
  std::vector<int> train_quota = apportion(train_total, weights, lo, train_hi);

  SplitAssignment splits;
  splits.seed = options.seed;
  splits.label_ratio = options.label_ratio;
  Rng rng(Rng::derive(options.seed, 0x53504C49ULL));  // split stream
  for (int c = 0; c < num_classes; ++c) {
    std::vector<int>& ids = by_class[c];
    std::sort(ids.begin(), ids.end());
    shuffle(ids, rng);
    int q = pool_quota[c];
    int t = train_quota[c];
    for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
      if (i < t) {
        splits.train_ids.push_back(ids[i]);
      } else if (i < q) {
        splits.val_ids.push_back(ids[i]);
      } else {
        splits.test_ids.push_back(ids[i]);
      }
    }
  }
  std::sort(splits.train_ids.begin(), splits.train_ids.end());
  std::sort(splits.val_ids.begin(), splits.val_ids.end());
  std::sort(splits.test_ids.begin(), splits.test_ids.end());
  return splits;
}

Corpus generate_synthetic(const SyntheticOptions& options) {
  if (options.classes < 1 || options.docs_per_class < 1 ||
      options.vocab_per_class < 1 || options.shared_vocab < 0 ||
      options.doc_length < 1) {
    throw Error(ErrorCode::kInvalidConfig, "synthetic counts must be >= 1");
  }
  std::vector<std::string> texts;
  std::vector<std::string> labels;
  Rng rng(Rng::derive(options.seed, 0x53594E54ULL));  // synth stream
  for (int c = 0; c < options.classes; ++c) {
    for (int d = 0; d < options.docs_per_class; ++d) {
      std::string text;
      for (int i = 0; i < options.doc_length; ++i) {
        bool from_class = options.shared_vocab == 0 ||
                          rng.uniform() < options.class_token_fraction;
        if (!text.empty()) text.push_back(' ');
        if (from_class) {
          text += "c" + std::to_string(c) + "w" +
                  std::to_string(rng.uniform_int(options.vocab_per_class));
        } else {
          text += "shw" + std::to_string(rng.uniform_int(options.shared_vocab));
        }
      }
      texts.push_back(std::move(text));
      labels.push_back("class" + std::to_string(c));
    }
  }
  CorpusOptions copts;
  copts.tokenizer = TokenizerMode::kPretokenized;
  copts.min_count = 0;
  copts.quiet = true;
  return build_corpus(texts, labels, copts);
}

}  // namespace msgcn
