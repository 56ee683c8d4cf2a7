#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "msgcn/corpus/corpus.hpp"
#include "msgcn/core/matrix.hpp"
#include "msgcn/graph/sparse.hpp"

namespace msgcn {

// Canonicalized unordered word pairs (i < j) that co-occur inside a sliding
// window in at least one document. This is the support of the word-word
// edges; the window defaults to the embedding context window.
class CooccurrenceIndex {
 public:
  CooccurrenceIndex() = default;
  explicit CooccurrenceIndex(int window) : window_(window) {}

  int window() const { return window_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

  static CooccurrenceIndex from_pairs(int window,
                                      std::vector<std::pair<int, int>> pairs);

 private:
  int window_ = 0;
  std::vector<std::pair<int, int>> pairs_;  // sorted, i < j, unique
};

CooccurrenceIndex cooccurrence_pairs(const Corpus& corpus, int window = 5);

// Every unordered pair over U words; only sensible for tiny vocabularies
// and oracle tests.
CooccurrenceIndex all_word_pairs(int num_words);

// Per-dimension word-word weights: tanh(1 / max(|W_i(t) - W_j(t)|, eps)).
// A pair is kept only if its largest per-dimension weight clears the prune
// threshold, so all T matrices share the same support.
std::vector<SparseMatrix> word_word_edges(const Matrix& word_embeddings,
                                          const CooccurrenceIndex& pairs);

// Distinct shared vocabulary ids per document pair, computed over unique
// tokens after frequency filtering.
class OverlapCounts {
 public:
  OverlapCounts() = default;
  OverlapCounts(int num_docs, std::vector<std::pair<std::pair<int, int>, int>> counts);

  int num_docs() const { return num_docs_; }
  int count(int i, int j) const;
  const std::vector<std::pair<std::pair<int, int>, int>>& entries() const {
    return entries_;  // sorted by (i, j), i < j
  }

 private:
  int num_docs_ = 0;
  std::vector<std::pair<std::pair<int, int>, int>> entries_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

OverlapCounts doc_overlap_counts(const Corpus& corpus);

// Per-dimension doc-doc weights for pairs whose word overlap reaches the
// threshold u; same tanh-of-inverse-distance form as the word-word edges.
std::vector<SparseMatrix> doc_doc_edges(const Matrix& doc_embeddings,
                                        const OverlapCounts& overlaps,
                                        int overlap_threshold = 5);

enum class TfidfVariant { kRaw, kSmooth };

// Word x doc matrix: count(w, d) * ln(K / df(w)). Words present in every
// document get weight zero and are not stored. The smooth variant uses
// ln((1 + K) / (1 + df)) + 1.
SparseMatrix tfidf(const Corpus& corpus, TfidfVariant variant = TfidfVariant::kRaw);

// N = U + K node graph with T adjacency matrices. Word nodes occupy ids
// [0, U), document nodes [U, N). The word-doc blocks repeat the same TF-IDF
// values in every dimension.
struct MultiEdgeGraph {
  int n_words = 0;
  int n_docs = 0;
  int dims = 0;
  std::vector<SparseMatrix> adjacency;   // T raw symmetric N x N matrices
  std::vector<SparseMatrix> normalized;  // T degree-normalized matrices
  Matrix node_features;                  // N x T, word rows stacked over doc rows

  int n_nodes() const { return n_words + n_docs; }
  int doc_node(int doc_id) const { return n_words + doc_id; }
};

MultiEdgeGraph assemble(const std::vector<SparseMatrix>& word_edges,
                        const std::vector<SparseMatrix>& doc_edges,
                        const SparseMatrix& tfidf_matrix,
                        const Matrix& word_embeddings,
                        const Matrix& doc_embeddings);

struct GraphOptions {
  int cooccurrence_window = 5;
  bool all_pairs = false;
  int doc_overlap_threshold = 5;
  TfidfVariant tfidf_variant = TfidfVariant::kRaw;
};

MultiEdgeGraph build_graph(const Corpus& corpus, const Matrix& word_embeddings,
                           const Matrix& doc_embeddings,
                           const GraphOptions& options);

void save_graph(const MultiEdgeGraph& graph, const std::string& path);
MultiEdgeGraph load_graph(const std::string& path);

struct GraphStats {
  std::size_t nnz_per_dim = 0;
  std::vector<std::size_t> degree_histogram;  // bucketed by powers of two
  std::vector<std::vector<double>> weight_quantiles;  // per dim: min/25/50/75/max
};

GraphStats graph_stats(const MultiEdgeGraph& graph);

}  // namespace msgcn
