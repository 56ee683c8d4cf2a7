#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "msgcn/core/io.hpp"
#include "msgcn/core/rng.hpp"
#include "msgcn/corpus/corpus.hpp"

using namespace msgcn;

namespace {

Corpus tiny_corpus(int min_count = 0) {
  std::vector<std::string> texts = {
      "alpha beta gamma", "alpha beta", "alpha delta gamma", "beta gamma delta",
  };
  std::vector<std::string> labels = {"x", "y", "x", "y"};
  CorpusOptions options;
  options.tokenizer = TokenizerMode::kPretokenized;
  options.min_count = min_count;
  options.quiet = true;
  return build_corpus(texts, labels, options);
}

bool same_docs(const Corpus& a, const Corpus& b) {
  if (a.num_docs() != b.num_docs() || a.num_words() != b.num_words()) return false;
  for (int i = 0; i < a.num_docs(); ++i) {
    if (a.docs[i].tokens != b.docs[i].tokens || a.docs[i].label != b.docs[i].label) {
      return false;
    }
  }
  return a.vocab.tokens() == b.vocab.tokens() && a.class_names == b.class_names;
}

}  // namespace

TEST_CASE("english tokenizer lowercases and strips punctuation") {
  CHECK(tokenize("The cat sat.", TokenizerMode::kEnglish) ==
        std::vector<std::string>{"the", "cat", "sat"});
  CHECK(tokenize("", TokenizerMode::kEnglish).empty());
  CHECK(tokenize("Don't stop-me now!", TokenizerMode::kEnglish) ==
        std::vector<std::string>{"don", "t", "stop", "me", "now"});
}

TEST_CASE("pretokenized mode splits on whitespace only") {
  CHECK(tokenize("\xE5\xBE\x88 \xE5\xA5\xBD\xE5\x90\x83", TokenizerMode::kPretokenized).size() ==
        2);
  CHECK(tokenize("  a\t b \n", TokenizerMode::kPretokenized) ==
        std::vector<std::string>{"a", "b"});
  CHECK(tokenize("Keep.Case!", TokenizerMode::kPretokenized) ==
        std::vector<std::string>{"Keep.Case!"});
}

TEST_CASE("vocabulary keeps tokens strictly above min_count") {
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 6; ++i) docs.push_back({"alpha"});
  for (int i = 0; i < 5; ++i) docs.push_back({"beta"});
  Vocabulary v = build_vocab(docs, 5);
  CHECK(v.size() == 1);
  CHECK(v.id("alpha") == 0);
  CHECK(v.id("beta") == -1);
}

TEST_CASE("min_count zero keeps every distinct token") {
  std::vector<std::vector<std::string>> docs = {{"a", "b", "b"}, {"c"}};
  Vocabulary v = build_vocab(docs, 0);
  CHECK(v.size() == 3);
}

TEST_CASE("vocabulary ids are frequency-descending with lexicographic ties") {
  std::vector<std::vector<std::string>> docs = {{"zed", "zed", "mid", "mid", "aaa"}};
  Vocabulary v = build_vocab(docs, 0);
  CHECK(v.token(0) == "mid");  // freq 2, "mid" < "zed"
  CHECK(v.token(1) == "zed");
  CHECK(v.token(2) == "aaa");
}

TEST_CASE("vocabulary round-trips ids and tokens") {
  Corpus c = tiny_corpus();
  for (int i = 0; i < c.num_words(); ++i) {
    CHECK(c.vocab.id(c.vocab.token(i)) == i);
  }
}

TEST_CASE("filtering everything raises AllTokensFiltered") {
  std::vector<std::vector<std::string>> docs = {{"one", "two"}};
  CHECK_THROWS_AS(build_vocab(docs, 5), Error);
  try {
    build_vocab(docs, 5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAllTokensFiltered);
  }
}

TEST_CASE("raising min_count never grows the vocabulary") {
  Rng rng(99);
  std::vector<std::vector<std::string>> docs;
  for (int d = 0; d < 30; ++d) {
    std::vector<std::string> doc;
    for (int i = 0; i < 20; ++i) doc.push_back("w" + std::to_string(rng.uniform_int(12)));
    docs.push_back(doc);
  }
  int prev = build_vocab(docs, 0).size();
  for (int mc = 1; mc < 8; ++mc) {
    int cur = 0;
    try {
      cur = build_vocab(docs, mc).size();
    } catch (const Error&) {
      cur = 0;
    }
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("documents keep only filtered token ids and empty docs are dropped") {
  std::vector<std::string> texts = {"aaa aaa bbb", "bbb", "ccc"};
  std::vector<std::string> labels = {"l0", "l1", "l2"};
  CorpusOptions options;
  options.tokenizer = TokenizerMode::kPretokenized;
  options.min_count = 1;  // keeps aaa (2x) and bbb (2x), drops ccc
  options.quiet = true;
  Corpus c = build_corpus(texts, labels, options);
  CHECK(c.num_docs() == 2);  // "ccc" doc became empty and was dropped
  CHECK(c.num_words() == 2);
  for (const Document& d : c.docs) {
    CHECK(!d.tokens.empty());
    for (int t : d.tokens) CHECK(t < c.num_words());
  }
  // Labels interned in first-appearance order over the raw input.
  CHECK(c.class_names == std::vector<std::string>{"l0", "l1", "l2"});
}

TEST_CASE("empty label string marks a document unlabelled") {
  std::vector<std::string> texts = {"a a", "b b"};
  std::vector<std::string> labels = {"pos", ""};
  CorpusOptions options;
  options.tokenizer = TokenizerMode::kPretokenized;
  options.min_count = 0;
  options.quiet = true;
  Corpus c = build_corpus(texts, labels, options);
  CHECK(c.docs[0].label == 0);
  CHECK(c.docs[1].label == kUnlabelled);
  CHECK(c.num_classes() == 1);
}

TEST_CASE("split sizes match the documented example") {
  std::vector<std::string> texts;
  std::vector<std::string> labels;
  for (int i = 0; i < 3000; ++i) {
    texts.push_back("tok" + std::to_string(i % 40) + " filler");
    labels.push_back(i < 1500 ? "a" : "b");
  }
  CorpusOptions options;
  options.tokenizer = TokenizerMode::kPretokenized;
  options.min_count = 0;
  options.quiet = true;
  Corpus c = build_corpus(texts, labels, options);
  SplitOptions s;
  s.label_ratio = 0.01;
  s.val_fraction = 0.10;
  s.seed = 5;
  SplitAssignment a = make_splits(c, s);
  CHECK(a.train_ids.size() == 27);
  CHECK(a.val_ids.size() == 3);
  CHECK(a.test_ids.size() == 2970);
}

TEST_CASE("splits partition the labelled documents") {
  Corpus c = tiny_corpus();
  SplitOptions s;
  s.label_ratio = 0.5;
  s.val_fraction = 0.0;
  s.seed = 3;
  SplitAssignment a = make_splits(c, s);
  std::set<int> all;
  for (int id : a.train_ids) all.insert(id);
  for (int id : a.val_ids) all.insert(id);
  for (int id : a.test_ids) all.insert(id);
  CHECK(all.size() == a.train_ids.size() + a.val_ids.size() + a.test_ids.size());
  CHECK(static_cast<int>(all.size()) == c.num_docs());
}

TEST_CASE("full supervision puts everything in train") {
  Corpus c = tiny_corpus();
  SplitOptions s;
  s.label_ratio = 1.0;
  s.val_fraction = 0.0;
  s.seed = 1;
  SplitAssignment a = make_splits(c, s);
  CHECK(static_cast<int>(a.train_ids.size()) == c.num_docs());
  CHECK(a.val_ids.empty());
  CHECK(a.test_ids.empty());
}

TEST_CASE("same seed reproduces the same splits") {
  SyntheticOptions opts;
  opts.seed = 77;
  Corpus c = generate_synthetic(opts);
  SplitOptions s;
  s.label_ratio = 0.05;
  s.seed = 9;
  SplitAssignment a = make_splits(c, s);
  SplitAssignment b = make_splits(c, s);
  CHECK(a.train_ids == b.train_ids);
  CHECK(a.val_ids == b.val_ids);
  CHECK(a.test_ids == b.test_ids);
  s.seed = 10;
  SplitAssignment d = make_splits(c, s);
  CHECK(a.train_ids != d.train_ids);
}

TEST_CASE("stratification tracks class proportions within rounding") {
  SyntheticOptions opts;
  opts.classes = 3;
  opts.docs_per_class = 60;
  opts.seed = 4;
  Corpus c = generate_synthetic(opts);
  SplitOptions s;
  s.label_ratio = 0.2;
  s.val_fraction = 0.1;
  s.seed = 2;
  SplitAssignment a = make_splits(c, s);
  std::vector<int> per_class(3, 0);
  for (int id : a.train_ids) per_class[c.docs[id].label] += 1;
  double total = static_cast<double>(a.train_ids.size());
  for (int k = 0; k < 3; ++k) {
    double expected = total / 3.0;  // balanced corpus
    CHECK(per_class[k] >= static_cast<int>(std::floor(expected)));
    CHECK(per_class[k] <= static_cast<int>(std::ceil(expected)));
    CHECK(per_class[k] >= 1);
  }
  CHECK(a.val_ids.size() ==
        static_cast<std::size_t>(std::lround(0.1 * (a.train_ids.size() + a.val_ids.size()))));
}

TEST_CASE("a class with no documents cannot be split") {
  std::vector<std::string> texts = {"a a", "b b"};
  std::vector<std::string> labels = {"only", "only"};
  CorpusOptions options;
  options.tokenizer = TokenizerMode::kPretokenized;
  options.min_count = 0;
  options.quiet = true;
  Corpus c = build_corpus(texts, labels, options);
  c.class_names.push_back("phantom");  // class with zero documents
  SplitOptions s;
  s.label_ratio = 0.5;
  CHECK_THROWS_AS(make_splits(c, s), Error);
}

TEST_CASE("synthetic corpus counts and determinism") {
  SyntheticOptions opts;
  opts.classes = 3;
  opts.docs_per_class = 100;
  opts.vocab_per_class = 20;
  opts.shared_vocab = 10;
  opts.doc_length = 30;
  opts.seed = 1;
  Corpus a = generate_synthetic(opts);
  CHECK(a.num_docs() == 300);
  CHECK(a.num_words() <= 70);
  CHECK(a.num_classes() == 3);
  Corpus b = generate_synthetic(opts);
  CHECK(same_docs(a, b));

  SyntheticOptions single;
  single.classes = 1;
  single.docs_per_class = 10;
  single.vocab_per_class = 5;
  single.shared_vocab = 0;
  single.doc_length = 8;
  single.seed = 2;
  Corpus c = generate_synthetic(single);
  CHECK(c.num_docs() == 10);
  CHECK(c.num_classes() == 1);
}

TEST_CASE("corpus snapshot round-trips through JSON") {
  SyntheticOptions opts;
  opts.seed = 21;
  Corpus a = generate_synthetic(opts);
  SplitOptions s;
  s.label_ratio = 0.1;
  s.seed = 6;
  a.splits = make_splits(a, s);
  auto path = (std::filesystem::temp_directory_path() / "msgcn_corpus_rt.json").string();
  save_corpus(a, path);
  Corpus b = load_corpus(path);
  CHECK(same_docs(a, b));
  CHECK(a.splits.train_ids == b.splits.train_ids);
  CHECK(a.splits.val_ids == b.splits.val_ids);
  CHECK(a.splits.test_ids == b.splits.test_ids);
  CHECK(a.splits.seed == b.splits.seed);
  std::filesystem::remove(path);
}

TEST_CASE("datasets load from a directory pair or a TSV file") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "msgcn_dataset_dir";
  fs::create_directories(dir);
  atomic_write((dir / "docs.txt").string(), "the cat sat\nthe dog ran\n");
  atomic_write((dir / "labels.txt").string(), "pets\npets\n");
  CorpusOptions options;
  options.min_count = 0;
  options.quiet = true;
  Corpus from_dir = load_dataset(dir.string(), options);
  CHECK(from_dir.num_docs() == 2);
  CHECK(from_dir.class_names == std::vector<std::string>{"pets"});

  fs::path tsv = fs::temp_directory_path() / "msgcn_dataset.tsv";
  atomic_write(tsv.string(), "pets\tthe cat sat\npets\tthe dog ran\n");
  Corpus from_tsv = load_dataset(tsv.string(), options);
  CHECK(same_docs(from_dir, from_tsv));
  fs::remove_all(dir);
  fs::remove(tsv);
}
