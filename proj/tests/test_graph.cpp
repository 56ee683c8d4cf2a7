#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "msgcn/core/rng.hpp"
#include "msgcn/corpus/corpus.hpp"
#include "msgcn/graph/build.hpp"
#include "msgcn/graph/sparse.hpp"

using namespace msgcn;

namespace {

// Corpus with documents given directly as token-id lists, bypassing the
// tokenizer so golden values do not depend on frequency-ordered ids.
Corpus manual_corpus(const std::vector<std::vector<int>>& docs, int num_words) {
  Corpus c;
  std::vector<std::string> tokens;
  std::vector<long> freqs(num_words, 1);
  for (int i = 0; i < num_words; ++i) tokens.push_back("w" + std::to_string(i));
  c.vocab = Vocabulary::from_parts(tokens, freqs, 0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    Document doc;
    doc.id = static_cast<int>(d);
    doc.tokens = docs[d];
    doc.label = 0;
    c.docs.push_back(doc);
  }
  c.class_names = {"c0"};
  return c;
}

Matrix random_symmetric_dense(int n, Rng& rng, double density) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < density) {
        double v = rng.uniform(0.05, 2.0);
        m(i, j) = v;
        m(j, i) = v;
      }
    }
  }
  return m;
}

SparseMatrix to_sparse(const Matrix& dense) {
  std::vector<Triplet> t;
  for (int i = 0; i < dense.rows(); ++i) {
    for (int j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) t.push_back({i, j, dense(i, j)});
    }
  }
  return SparseMatrix::from_triplets(dense.rows(), dense.cols(), std::move(t));
}

// Dense reference for D^(-1/2) (A + I) D^(-1/2).
Matrix normalize_dense(const Matrix& a) {
  const int n = a.rows();
  Matrix tilde = a;
  for (int i = 0; i < n; ++i) tilde(i, i) += 1.0;
  std::vector<double> inv_sqrt(n);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += tilde(i, j);
    inv_sqrt[i] = 1.0 / std::sqrt(deg);
  }
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out(i, j) = inv_sqrt[i] * tilde(i, j) * inv_sqrt[j];
    }
  }
  return out;
}

std::set<std::pair<int, int>> pair_set(const CooccurrenceIndex& index) {
  return {index.pairs().begin(), index.pairs().end()};
}

}  // namespace

TEST_CASE("sparse construction merges duplicates and drops zeros") {
  SparseMatrix m = SparseMatrix::from_triplets(
      2, 3, {{0, 2, 0.25}, {0, 2, 0.5}, {1, 0, 3.0}, {1, 1, 0.0}});
  CHECK(m.nnz() == 2);
  CHECK(m.value_at(0, 2) == 0.75);
  CHECK(m.value_at(1, 0) == 3.0);
  CHECK(m.value_at(1, 1) == 0.0);
  CHECK(m.row_sum(0) == 0.75);
  auto cols = m.row_cols(1);
  CHECK(std::is_sorted(cols.begin(), cols.end()));
}

TEST_CASE("sparse multiply matches the dense product") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + rng.uniform_int(10);
    int m = 2 + rng.uniform_int(10);
    int d = 1 + rng.uniform_int(5);
    Matrix dense(n, m);
    for (double& v : dense.data()) {
      v = rng.uniform() < 0.4 ? rng.uniform(-1.0, 1.0) : 0.0;
    }
    Matrix x(m, d);
    for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
    Matrix expected = matmul(dense, x);
    Matrix got = to_sparse(dense).multiply(x);
    REQUIRE(got.same_shape(expected));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("cooccurrence respects the window and skips same-token pairs") {
  Corpus c = manual_corpus({{0, 1, 2, 3}}, 4);
  CHECK(pair_set(cooccurrence_pairs(c, 1)) ==
        std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
  CHECK(pair_set(cooccurrence_pairs(c, 2)) ==
        std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  CHECK(cooccurrence_pairs(c, 5).size() == 6);

  Corpus repeated = manual_corpus({{0, 0, 1}}, 2);
  CHECK(pair_set(cooccurrence_pairs(repeated, 5)) ==
        std::set<std::pair<int, int>>{{0, 1}});

  Corpus two_docs = manual_corpus({{0, 1}, {2, 3}}, 4);
  auto pairs = pair_set(cooccurrence_pairs(two_docs, 5));
  CHECK(pairs == std::set<std::pair<int, int>>{{0, 1}, {2, 3}});
}

TEST_CASE("all-pairs index enumerates every unordered pair") {
  CHECK(all_word_pairs(4).size() == 6);
  CHECK(all_word_pairs(1).size() == 0);
}

TEST_CASE("word edge weights follow tanh of inverse distance") {
  Matrix emb(3, 2);
  emb(0, 0) = 0.0; emb(0, 1) = 1.0;
  emb(1, 0) = 1.0; emb(1, 1) = 1.0;
  emb(2, 0) = 0.5; emb(2, 1) = 3.0;
  auto edges = word_word_edges(emb, all_word_pairs(3));
  REQUIRE(edges.size() == 2);

  CHECK(edges[0].value_at(0, 1) == doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
  CHECK(edges[0].value_at(0, 2) == doctest::Approx(std::tanh(2.0)).epsilon(1e-12));
  CHECK(edges[1].value_at(0, 2) == doctest::Approx(std::tanh(0.5)).epsilon(1e-12));
  // Identical coordinates hit the distance floor and saturate to exactly 1.
  CHECK(edges[1].value_at(0, 1) == 1.0);

  for (const auto& e : edges) {
    CHECK(e.nnz() == edges[0].nnz());
    CHECK(e.is_symmetric());
    for (double v : e.values()) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("closer coordinates always give heavier edges") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    double a = rng.uniform(-3.0, 3.0);
    double near = a + rng.uniform(0.01, 0.5);
    double far = near + rng.uniform(0.01, 2.0);
    Matrix emb(3, 1);
    emb(0, 0) = a;
    emb(1, 0) = near;
    emb(2, 0) = far;
    auto edges = word_word_edges(emb, all_word_pairs(3));
    CHECK(edges[0].value_at(0, 1) > edges[0].value_at(0, 2));
  }
}

TEST_CASE("document overlap counts distinct shared vocabulary ids") {
  Corpus c = manual_corpus({{0, 1, 2, 2}, {1, 2, 3}, {5}}, 6);
  OverlapCounts overlaps = doc_overlap_counts(c);
  CHECK(overlaps.count(0, 1) == 2);
  CHECK(overlaps.count(1, 0) == 2);
  CHECK(overlaps.count(0, 2) == 0);
  CHECK(overlaps.count(1, 1) == 0);
  CHECK(overlaps.entries().size() == 1);
}

TEST_CASE("document edges require the overlap threshold") {
  Corpus c = manual_corpus({{0, 1, 2, 2}, {1, 2, 3}, {5}}, 6);
  OverlapCounts overlaps = doc_overlap_counts(c);
  Matrix emb(3, 2);
  Rng rng(5);
  for (double& v : emb.data()) v = rng.uniform(-1.0, 1.0);

  auto pass = doc_doc_edges(emb, overlaps, 2);
  CHECK(pass[0].nnz() == 2);  // the (0,1) pair, stored symmetrically
  CHECK(pass[0].value_at(0, 1) ==
        doctest::Approx(std::tanh(1.0 / std::fabs(emb(0, 0) - emb(1, 0)))).epsilon(1e-12));

  auto blocked = doc_doc_edges(emb, overlaps, 3);
  CHECK(blocked[0].nnz() == 0);
}

TEST_CASE("tfidf matches count times log inverse document frequency") {
  Corpus c = manual_corpus({{0, 0, 0, 1}, {0, 2}, {1}, {1, 2}}, 3);
  SparseMatrix m = tfidf(c);
  CHECK(m.n_rows() == 3);
  CHECK(m.n_cols() == 4);
  // Word 0 appears 3 times in doc 0 and in 2 of the 4 documents.
  CHECK(m.value_at(0, 0) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(m.value_at(1, 2) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
  CHECK(m.value_at(0, 2) == 0.0);

  SparseMatrix smooth = tfidf(c, TfidfVariant::kSmooth);
  CHECK(smooth.value_at(0, 0) ==
        doctest::Approx(3.0 * (std::log(5.0 / 3.0) + 1.0)).epsilon(1e-12));
}

TEST_CASE("a word present in every document carries no tfidf weight") {
  Corpus c = manual_corpus({{0, 1}, {0, 2}, {0, 1, 2}}, 3);
  SparseMatrix m = tfidf(c);
  CHECK(m.value_at(0, 0) == 0.0);
  CHECK(m.value_at(0, 1) == 0.0);
  for (double v : m.values()) CHECK(v != 0.0);
  CHECK(m.nnz() == 4);  // word1 in docs {0,2}, word2 in docs {1,2}
}

TEST_CASE("normalization golden cases") {
  SparseMatrix ring = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  SparseMatrix n1 = normalize_adjacency(ring);
  CHECK(n1.value_at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n1.value_at(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n1.value_at(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n1.value_at(1, 1) == doctest::Approx(0.5).epsilon(1e-15));

  SparseMatrix heavy = SparseMatrix::from_triplets(2, 2, {{0, 1, 2.0}, {1, 0, 2.0}});
  SparseMatrix n2 = normalize_adjacency(heavy);
  CHECK(n2.value_at(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(n2.value_at(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  SparseMatrix singleton(1, 1);
  CHECK(normalize_adjacency(singleton).value_at(0, 0) == 1.0);

  SparseMatrix isolated(3, 3);
  SparseMatrix n3 = normalize_adjacency(isolated);
  for (int i = 0; i < 3; ++i) {
    CHECK(n3.value_at(i, i) == 1.0);
    CHECK(n3.row_sum(i) == 1.0);
  }
}

TEST_CASE("normalization matches a dense oracle on random graphs") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + rng.uniform_int(20);
    Matrix dense = random_symmetric_dense(n, rng, 0.3);
    SparseMatrix sparse = to_sparse(dense);
    SparseMatrix got = normalize_adjacency(sparse);
    Matrix expected = normalize_dense(dense);
    CHECK(got.is_symmetric());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(std::fabs(got.value_at(i, j) - expected(i, j)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("assembly places the three blocks and stacks features") {
  Matrix word_emb(2, 2);
  word_emb(0, 0) = 0.1; word_emb(0, 1) = 0.9;
  word_emb(1, 0) = 0.4; word_emb(1, 1) = 0.2;
  Matrix doc_emb(2, 2);
  doc_emb(0, 0) = -0.3; doc_emb(0, 1) = 0.5;
  doc_emb(1, 0) = 0.6; doc_emb(1, 1) = -0.1;

  Corpus c = manual_corpus({{0, 1, 1}, {0, 1}}, 2);
  auto word_edges = word_word_edges(word_emb, cooccurrence_pairs(c, 5));
  auto doc_edges = doc_doc_edges(doc_emb, doc_overlap_counts(c), 2);
  SparseMatrix wd = tfidf(c, TfidfVariant::kSmooth);

  MultiEdgeGraph g = assemble(word_edges, doc_edges, wd, word_emb, doc_emb);
  CHECK(g.n_nodes() == 4);
  CHECK(g.dims == 2);
  CHECK(g.doc_node(1) == 3);

  for (int t = 0; t < 2; ++t) {
    const SparseMatrix& a = g.adjacency[t];
    CHECK(a.is_symmetric());
    CHECK(a.nnz() == g.adjacency[0].nnz());
    // Word-doc block repeats the same tfidf values in every dimension.
    for (int w = 0; w < 2; ++w) {
      for (int d = 0; d < 2; ++d) {
        CHECK(a.value_at(w, g.doc_node(d)) == wd.value_at(w, d));
        CHECK(a.value_at(g.doc_node(d), w) == wd.value_at(w, d));
      }
    }
    // Word-word and doc-doc blocks carry their per-dimension weights.
    CHECK(a.value_at(0, 1) == word_edges[t].value_at(0, 1));
    CHECK(a.value_at(2, 3) == doc_edges[t].value_at(0, 1));
    // No diagonal entries before normalization adds self-loops.
    for (int i = 0; i < 4; ++i) CHECK(a.value_at(i, i) == 0.0);
  }

  for (int w = 0; w < 2; ++w) {
    for (int t = 0; t < 2; ++t) CHECK(g.node_features(w, t) == word_emb(w, t));
  }
  for (int d = 0; d < 2; ++d) {
    for (int t = 0; t < 2; ++t) {
      CHECK(g.node_features(g.doc_node(d), t) == doc_emb(d, t));
    }
  }
}

TEST_CASE("assembly rejects mismatched shapes") {
  Matrix word_emb(2, 2);
  Matrix doc_emb(2, 3);
  Corpus c = manual_corpus({{0, 1}, {0, 1}}, 2);
  auto word_edges = word_word_edges(word_emb, all_word_pairs(2));
  auto doc_edges = doc_doc_edges(Matrix(2, 2), doc_overlap_counts(c), 2);
  SparseMatrix wd = tfidf(c);
  CHECK_THROWS_AS(assemble(word_edges, doc_edges, wd, word_emb, doc_emb), Error);

  Matrix doc_ok(2, 2);
  auto too_few = word_edges;
  too_few.pop_back();
  CHECK_THROWS_AS(assemble(too_few, doc_edges, wd, word_emb, doc_ok), Error);
}

TEST_CASE("full graph build is consistent and round-trips through JSON") {
  SyntheticOptions synth;
  synth.classes = 2;
  synth.docs_per_class = 8;
  synth.vocab_per_class = 6;
  synth.shared_vocab = 3;
  synth.doc_length = 12;
  synth.seed = 30;
  Corpus corpus = generate_synthetic(synth);

  Rng rng(31);
  Matrix word_emb(corpus.num_words(), 3);
  Matrix doc_emb(corpus.num_docs(), 3);
  for (double& v : word_emb.data()) v = rng.uniform(-1.0, 1.0);
  for (double& v : doc_emb.data()) v = rng.uniform(-1.0, 1.0);

  GraphOptions options;
  options.doc_overlap_threshold = 2;
  MultiEdgeGraph g = build_graph(corpus, word_emb, doc_emb, options);
  CHECK(g.n_words == corpus.num_words());
  CHECK(g.n_docs == corpus.num_docs());
  CHECK(g.dims == 3);
  REQUIRE(g.adjacency.size() == 3);
  REQUIRE(g.normalized.size() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(g.adjacency[t].nnz() == g.adjacency[0].nnz());
    CHECK(g.adjacency[t].is_symmetric());
    CHECK(g.normalized[t].is_symmetric());
  }

  auto path = (std::filesystem::temp_directory_path() / "msgcn_graph_rt.json").string();
  save_graph(g, path);
  MultiEdgeGraph back = load_graph(path);
  CHECK(back.n_words == g.n_words);
  CHECK(back.n_docs == g.n_docs);
  CHECK(back.dims == g.dims);
  CHECK(back.node_features.data() == g.node_features.data());
  for (int t = 0; t < 3; ++t) {
    CHECK(back.adjacency[t].values() == g.adjacency[t].values());
    CHECK(back.adjacency[t].col_indices() == g.adjacency[t].col_indices());
    CHECK(back.normalized[t].values() == g.normalized[t].values());
  }
  std::filesystem::remove(path);
}

TEST_CASE("graph statistics summarize the first adjacency dimension") {
  Matrix word_emb(2, 2, 0.5);
  word_emb(1, 0) = 0.25;
  word_emb(1, 1) = 0.75;
  Matrix doc_emb(2, 2, -0.5);
  doc_emb(1, 0) = 0.0;
  Corpus c = manual_corpus({{0, 1, 1}, {0, 1}}, 2);
  GraphOptions options;
  options.doc_overlap_threshold = 2;
  MultiEdgeGraph g = build_graph(c, word_emb, doc_emb, options);
  GraphStats stats = graph_stats(g);
  CHECK(stats.nnz_per_dim == g.adjacency[0].nnz());
  std::size_t nodes = 0;
  for (std::size_t b : stats.degree_histogram) nodes += b;
  CHECK(nodes == static_cast<std::size_t>(g.n_nodes()));
  REQUIRE(stats.weight_quantiles.size() == 2);
  for (const auto& q : stats.weight_quantiles) {
    REQUIRE(q.size() == 5);
    CHECK(std::is_sorted(q.begin(), q.end()));
  }
}
