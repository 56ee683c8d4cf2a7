#include "msgcn/graph/build.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "msgcn/core/io.hpp"

namespace msgcn {

using nlohmann::json;

namespace {

constexpr double kDistanceEps = 1e-12;
constexpr double kPruneThreshold = 1e-6;

inline std::uint64_t pair_key(int i, int j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

double edge_weight(double a, double b) {
  return std::tanh(1.0 / std::max(std::abs(a - b), kDistanceEps));
}

// Shared builder for the word-word and doc-doc blocks: for each retained
// pair emit T symmetric matrices whose (i,j) value is the per-dimension
// tanh weight. The support is pruned as a whole (max over dimensions), so
// nnz is identical across dimensions.
std::vector<SparseMatrix> pairwise_edges(
    const Matrix& embeddings, const std::vector<std::pair<int, int>>& pairs) {
  const int n = embeddings.rows();
  const int dims = embeddings.cols();
  std::vector<std::vector<Triplet>> triplets(dims);
  std::vector<double> weights(dims);
  for (auto [i, j] : pairs) {
    const double* ei = embeddings.row(i);
    const double* ej = embeddings.row(j);
    double best = 0.0;
    for (int t = 0; t < dims; ++t) {
      weights[t] = edge_weight(ei[t], ej[t]);
      best = std::max(best, weights[t]);
    }
    if (best < kPruneThreshold) continue;
    for (int t = 0; t < dims; ++t) {
      triplets[t].push_back({i, j, weights[t]});
      triplets[t].push_back({j, i, weights[t]});
    }
  }
  std::vector<SparseMatrix> out;
  out.reserve(dims);
  for (int t = 0; t < dims; ++t) {
    out.push_back(SparseMatrix::from_triplets(n, n, std::move(triplets[t])));
  }
  return out;
}

}  // namespace

CooccurrenceIndex CooccurrenceIndex::from_pairs(
    int window, std::vector<std::pair<int, int>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  CooccurrenceIndex index(window);
  index.pairs_ = std::move(pairs);
  return index;
}

CooccurrenceIndex cooccurrence_pairs(const Corpus& corpus, int window) {
  std::unordered_set<std::uint64_t> seen;
  for (const auto& doc : corpus.docs) {
    const auto& toks = doc.tokens;
    const int len = static_cast<int>(toks.size());
    for (int i = 0; i < len; ++i) {
      const int hi = std::min(len - 1, i + window);
      for (int j = i + 1; j <= hi; ++j) {
        if (toks[i] == toks[j]) continue;
        int a = std::min(toks[i], toks[j]);
        int b = std::max(toks[i], toks[j]);
        seen.insert(pair_key(a, b));
      }
    }
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(seen.size());
  for (std::uint64_t key : seen) {
    pairs.emplace_back(static_cast<int>(key >> 32),
                       static_cast<int>(key & 0xFFFFFFFFULL));
  }
  return CooccurrenceIndex::from_pairs(window, std::move(pairs));
}

CooccurrenceIndex all_word_pairs(int num_words) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(num_words) * (num_words - 1) / 2);
  for (int i = 0; i < num_words; ++i) {
    for (int j = i + 1; j < num_words; ++j) pairs.emplace_back(i, j);
  }
  return CooccurrenceIndex::from_pairs(-1, std::move(pairs));
}

std::vector<SparseMatrix> word_word_edges(const Matrix& word_embeddings,
                                          const CooccurrenceIndex& pairs) {
  return pairwise_edges(word_embeddings, pairs.pairs());
}

OverlapCounts::OverlapCounts(
    int num_docs, std::vector<std::pair<std::pair<int, int>, int>> counts)
    : num_docs_(num_docs), entries_(std::move(counts)) {
  std::sort(entries_.begin(), entries_.end());
  for (const auto& [pair, n] : entries_) {
    lookup_.emplace(pair_key(pair.first, pair.second), n);
  }
}

int OverlapCounts::count(int i, int j) const {
  if (i == j) return 0;
  auto it = lookup_.find(pair_key(std::min(i, j), std::max(i, j)));
  return it == lookup_.end() ? 0 : it->second;
}

OverlapCounts doc_overlap_counts(const Corpus& corpus) {
  const int num_docs = corpus.num_docs();
  // Inverted index over unique tokens per document.
  std::vector<std::vector<int>> docs_with_word(corpus.num_words());
  for (const auto& doc : corpus.docs) {
    std::vector<int> unique = doc.tokens;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (int w : unique) docs_with_word[w].push_back(doc.id);
  }
  std::unordered_map<std::uint64_t, int> counts;
  for (const auto& docs : docs_with_word) {
    for (std::size_t a = 0; a < docs.size(); ++a) {
      for (std::size_t b = a + 1; b < docs.size(); ++b) {
        ++counts[pair_key(docs[a], docs[b])];
      }
    }
  }
  std::vector<std::pair<std::pair<int, int>, int>> entries;
  entries.reserve(counts.size());
  for (auto [key, n] : counts) {
    entries.push_back({{static_cast<int>(key >> 32),
                        static_cast<int>(key & 0xFFFFFFFFULL)},
                       n});
  }
  return OverlapCounts(num_docs, std::move(entries));
}

std::vector<SparseMatrix> doc_doc_edges(const Matrix& doc_embeddings,
                                        const OverlapCounts& overlaps,
                                        int overlap_threshold) {
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [pair, n] : overlaps.entries()) {
    if (n >= overlap_threshold) pairs.push_back(pair);
  }
  return pairwise_edges(doc_embeddings, pairs);
}

SparseMatrix tfidf(const Corpus& corpus, TfidfVariant variant) {
  const int num_words = corpus.num_words();
  const int num_docs = corpus.num_docs();
  std::vector<long> df(num_words, 0);
  std::vector<std::vector<std::pair<int, int>>> doc_counts(num_docs);
  for (const auto& doc : corpus.docs) {
    std::vector<int> sorted = doc.tokens;
    std::sort(sorted.begin(), sorted.end());
    auto& counts = doc_counts[doc.id];
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      counts.push_back({sorted[i], static_cast<int>(j - i)});
      ++df[sorted[i]];
      i = j;
    }
  }
  std::vector<Triplet> triplets;
  for (int d = 0; d < num_docs; ++d) {
    for (auto [w, count] : doc_counts[d]) {
      double idf =
          variant == TfidfVariant::kRaw
              ? std::log(static_cast<double>(num_docs) / static_cast<double>(df[w]))
              : std::log((1.0 + num_docs) / (1.0 + static_cast<double>(df[w]))) + 1.0;
      double v = count * idf;
      if (v != 0.0) triplets.push_back({w, d, v});
    }
  }
  return SparseMatrix::from_triplets(num_words, num_docs, std::move(triplets));
}

MultiEdgeGraph assemble(const std::vector<SparseMatrix>& word_edges,
                        const std::vector<SparseMatrix>& doc_edges,
                        const SparseMatrix& tfidf_matrix,
                        const Matrix& word_embeddings,
                        const Matrix& doc_embeddings) {
  const int dims = word_embeddings.cols();
  if (doc_embeddings.cols() != dims) {
    throw Error(ErrorCode::kShapeMismatch,
                "word and document embedding dimensions differ");
  }
  if (static_cast<int>(word_edges.size()) != dims ||
      static_cast<int>(doc_edges.size()) != dims) {
    throw Error(ErrorCode::kShapeMismatch,
                "edge dimension count does not match embedding dimension");
  }
  const int num_words = word_embeddings.rows();
  const int num_docs = doc_embeddings.rows();
  if (tfidf_matrix.n_rows() != num_words || tfidf_matrix.n_cols() != num_docs) {
    throw Error(ErrorCode::kShapeMismatch, "tfidf matrix shape mismatch");
  }
  const int n = num_words + num_docs;

  // The word-doc block is shared across dimensions; build its triplets once.
  std::vector<Triplet> tfidf_triplets;
  tfidf_triplets.reserve(2 * tfidf_matrix.nnz());
  for (int w = 0; w < num_words; ++w) {
    auto cols = tfidf_matrix.row_cols(w);
    auto vals = tfidf_matrix.row_values(w);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int doc_node = num_words + cols[k];
      tfidf_triplets.push_back({w, doc_node, vals[k]});
      tfidf_triplets.push_back({doc_node, w, vals[k]});
    }
  }

  MultiEdgeGraph graph;
  graph.n_words = num_words;
  graph.n_docs = num_docs;
  graph.dims = dims;
  graph.adjacency.reserve(dims);
  graph.normalized.reserve(dims);
  for (int t = 0; t < dims; ++t) {
    if (word_edges[t].n_rows() != num_words || doc_edges[t].n_rows() != num_docs) {
      throw Error(ErrorCode::kShapeMismatch, "edge block shape mismatch");
    }
    std::vector<Triplet> triplets = tfidf_triplets;
    for (int i = 0; i < num_words; ++i) {
      auto cols = word_edges[t].row_cols(i);
      auto vals = word_edges[t].row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        triplets.push_back({i, cols[k], vals[k]});
      }
    }
    for (int i = 0; i < num_docs; ++i) {
      auto cols = doc_edges[t].row_cols(i);
      auto vals = doc_edges[t].row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        triplets.push_back({num_words + i, num_words + cols[k], vals[k]});
      }
    }
    graph.adjacency.push_back(SparseMatrix::from_triplets(n, n, std::move(triplets)));
    graph.normalized.push_back(normalize_adjacency(graph.adjacency.back()));
  }

  graph.node_features = Matrix(n, dims);
  for (int w = 0; w < num_words; ++w) {
    const double* src = word_embeddings.row(w);
    std::copy(src, src + dims, graph.node_features.row(w));
  }
  for (int d = 0; d < num_docs; ++d) {
    const double* src = doc_embeddings.row(d);
    std::copy(src, src + dims, graph.node_features.row(num_words + d));
  }
  return graph;
}

MultiEdgeGraph build_graph(const Corpus& corpus, const Matrix& word_embeddings,
                           const Matrix& doc_embeddings,
                           const GraphOptions& options) {
  CooccurrenceIndex pairs =
      options.all_pairs ? all_word_pairs(corpus.num_words())
                        : cooccurrence_pairs(corpus, options.cooccurrence_window);
  auto word_edges = word_word_edges(word_embeddings, pairs);
  auto overlaps = doc_overlap_counts(corpus);
  auto doc_edges =
      doc_doc_edges(doc_embeddings, overlaps, options.doc_overlap_threshold);
  auto wd = tfidf(corpus, options.tfidf_variant);
  return assemble(word_edges, doc_edges, wd, word_embeddings, doc_embeddings);
}

namespace {

json sparse_to_json(const SparseMatrix& m) {
  return {{"rows", m.n_rows()},
          {"cols", m.n_cols()},
          {"row_offsets", m.row_offsets()},
          {"col_indices", m.col_indices()},
          {"values", m.values()}};
}

SparseMatrix sparse_from_json(const json& j) {
  return SparseMatrix::from_parts(
      j["rows"].get<int>(), j["cols"].get<int>(),
      j["row_offsets"].get<std::vector<std::size_t>>(),
      j["col_indices"].get<std::vector<int>>(),
      j["values"].get<std::vector<double>>());
}

}  // namespace

void save_graph(const MultiEdgeGraph& graph, const std::string& path) {
  json j;
  j["n_words"] = graph.n_words;
  j["n_docs"] = graph.n_docs;
  j["dims"] = graph.dims;
  json adj = json::array();
  for (const auto& m : graph.adjacency) adj.push_back(sparse_to_json(m));
  j["adjacency"] = std::move(adj);
  json norm = json::array();
  for (const auto& m : graph.normalized) norm.push_back(sparse_to_json(m));
  j["normalized"] = std::move(norm);
  j["node_features"] = {{"rows", graph.node_features.rows()},
                        {"cols", graph.node_features.cols()},
                        {"data", graph.node_features.data()}};
  atomic_write(path, j.dump() + "\n");
}

MultiEdgeGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  json j = json::parse(in);
  MultiEdgeGraph graph;
  graph.n_words = j["n_words"].get<int>();
  graph.n_docs = j["n_docs"].get<int>();
  graph.dims = j["dims"].get<int>();
  for (const auto& m : j["adjacency"]) graph.adjacency.push_back(sparse_from_json(m));
  for (const auto& m : j["normalized"]) graph.normalized.push_back(sparse_from_json(m));
  const auto& nf = j["node_features"];
  graph.node_features = Matrix(nf["rows"].get<int>(), nf["cols"].get<int>());
  graph.node_features.data() = nf["data"].get<std::vector<double>>();
  return graph;
}

GraphStats graph_stats(const MultiEdgeGraph& graph) {
  GraphStats stats;
  if (graph.adjacency.empty()) return stats;
  stats.nnz_per_dim = graph.adjacency[0].nnz();
  const int n = graph.n_nodes();
  for (int r = 0; r < n; ++r) {
    std::size_t deg = graph.adjacency[0].row_cols(r).size();
    std::size_t bucket = 0;
    while ((1ULL << bucket) <= deg) ++bucket;
    if (stats.degree_histogram.size() <= bucket) {
      stats.degree_histogram.resize(bucket + 1, 0);
    }
    ++stats.degree_histogram[bucket];
  }
  for (const auto& adj : graph.adjacency) {
    std::vector<double> vals(adj.values());
    std::sort(vals.begin(), vals.end());
    std::vector<double> q;
    if (vals.empty()) {
      q = {0, 0, 0, 0, 0};
    } else {
      auto at = [&](double f) {
        return vals[static_cast<std::size_t>(f * (vals.size() - 1))];
      };
      q = {vals.front(), at(0.25), at(0.5), at(0.75), vals.back()};
    }
    stats.weight_quantiles.push_back(std::move(q));
  }
  return stats;
}

}  // namespace msgcn
