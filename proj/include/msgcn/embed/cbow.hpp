#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msgcn/core/matrix.hpp"
#include "msgcn/core/rng.hpp"
#include "msgcn/corpus/corpus.hpp"

namespace msgcn {

// Unigram noise distribution for negative sampling: weights proportional to
// frequency^exponent, sampled through a cumulative table.
class NoiseDistribution {
 public:
  NoiseDistribution(const std::vector<long>& frequencies, double exponent);

  int size() const { return static_cast<int>(cdf_.size()); }
  double weight(int id) const { return weights_[id]; }
  const std::vector<double>& cdf() const { return cdf_; }

  int sample(Rng& rng) const;

 private:
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

// k i.i.d. draws from the distribution, resampling any collision with
// `exclude`.
std::vector<int> sample_negatives(const NoiseDistribution& dist, int k,
                                  int exclude, Rng& rng);

struct CbowOptions {
  int dim = 25;
  int window = 5;
  int epochs = 200;
  int negatives = 5;
  double lr_start = 0.025;
  double noise_exponent = 0.75;
  bool average_context = false;  // the context projection is summed by default
  std::uint64_t seed = 0;
};

// One negative-sampling update. `h` is the summed (or averaged) context
// projection; gradients flow back to every contributor row listed in
// `context_rows`. Returns the loss at the pre-update parameters.
double sgns_step(Matrix& input, Matrix& output,
                 std::span<const int> context_rows, int center,
                 std::span<const int> negatives, double lr,
                 bool average_context);

// CBOW trainer covering both word vectors and document vectors. In document
// mode the projection matrices have U+K rows; row U+k is the vector of
// document k and joins the context sum of every position in that document.
class CbowTrainer {
 public:
  enum class Mode { kWords, kDocuments };

  CbowTrainer(const Corpus& corpus, const CbowOptions& options, Mode mode);

  // Trainable scalars across both projection matrices: 2*U*T in word mode,
  // 2*T*(U+K) in document mode.
  std::size_t parameter_count() const;

  // Runs training and returns the input-side projection rows of interest:
  // the U word rows in word mode, the K document rows in document mode.
  Matrix train();

 private:
  const Corpus& corpus_;
  CbowOptions options_;
  Mode mode_;
  int projection_rows_;
  Matrix input_;
  Matrix output_;
};

Matrix train_word2vec(const Corpus& corpus, const CbowOptions& options);
Matrix train_doc2vec(const Corpus& corpus, const CbowOptions& options);

// Embedding TSV: header `#dim=T`, then `<row_key>\t<v1>\t...\t<vT>` per row.
// Keys are token strings for word vectors and `doc:<id>` for document
// vectors. Values are written with enough digits to round-trip bit-exactly.
void save_embeddings(const std::string& path,
                     const std::vector<std::string>& row_keys,
                     const Matrix& values);

// Rows may appear in any order in the file; the result is ordered by
// `row_keys`. Throws ShapeMismatch on a wrong dimension and MissingRow
// (naming the key) when a required row is absent.
Matrix load_embeddings(const std::string& path,
                       const std::vector<std::string>& row_keys,
                       int expected_dim);

std::vector<std::string> word_row_keys(const Corpus& corpus);
std::vector<std::string> doc_row_keys(const Corpus& corpus);

}  // namespace msgcn
