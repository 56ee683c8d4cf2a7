#include "msgcn/embed/cbow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "msgcn/core/io.hpp"

namespace msgcn {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

NoiseDistribution::NoiseDistribution(const std::vector<long>& frequencies,
                                     double exponent) {
  weights_.reserve(frequencies.size());
  double total = 0.0;
  for (long f : frequencies) {
    double w = std::pow(static_cast<double>(f), exponent);
    weights_.push_back(w);
    total += w;
  }
  cdf_.reserve(weights_.size());
  double acc = 0.0;
  for (double w : weights_) {
    acc += w / total;
    cdf_.push_back(acc);
  }
  if (!cdf_.empty()) cdf_.back() = 1.0;
}

int NoiseDistribution::sample(Rng& rng) const {
  double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin());
}

std::vector<int> sample_negatives(const NoiseDistribution& dist, int k,
                                  int exclude, Rng& rng) {
  std::vector<int> out;
  out.reserve(k);
  while (static_cast<int>(out.size()) < k) {
    int id = dist.sample(rng);
    if (id == exclude) continue;
    out.push_back(id);
  }
  return out;
}

double sgns_step(Matrix& input, Matrix& output,
                 std::span<const int> context_rows, int center,
                 std::span<const int> negatives, double lr,
                 bool average_context) {
  const int dim = input.cols();
  const double ctx_scale =
      average_context && !context_rows.empty()
          ? 1.0 / static_cast<double>(context_rows.size())
          : 1.0;

  std::vector<double> h(dim, 0.0);
  for (int row : context_rows) {
    const double* p = input.row(row);
    for (int d = 0; d < dim; ++d) h[d] += p[d] * ctx_scale;
  }

  std::vector<double> grad_h(dim, 0.0);
  double loss = 0.0;
  auto update_target = [&](int target, double label) {
    double* o = output.row(target);
    double score = 0.0;
    for (int d = 0; d < dim; ++d) score += h[d] * o[d];
    double p = sigmoid(score);
    loss -= label > 0.5 ? std::log(std::max(p, 1e-300))
                        : std::log(std::max(1.0 - p, 1e-300));
    double g = p - label;  // dL/dscore
    for (int d = 0; d < dim; ++d) {
      grad_h[d] += g * o[d];
      o[d] -= lr * g * h[d];
    }
  };
  update_target(center, 1.0);
  for (int neg : negatives) update_target(neg, 0.0);

  for (int row : context_rows) {
    double* p = input.row(row);
    for (int d = 0; d < dim; ++d) p[d] -= lr * grad_h[d] * ctx_scale;
  }
  return loss;
}

CbowTrainer::CbowTrainer(const Corpus& corpus, const CbowOptions& options,
                         Mode mode)
    : corpus_(corpus), options_(options), mode_(mode) {
  const int vocab = corpus.num_words();
  if (vocab < 2 && mode == Mode::kWords) {
    throw Error(ErrorCode::kDegenerateCorpus,
                "word vector training needs at least 2 vocabulary entries");
  }
  if (corpus.num_docs() < 1) {
    throw Error(ErrorCode::kDegenerateCorpus, "corpus has no documents");
  }
  projection_rows_ =
      mode == Mode::kDocuments ? vocab + corpus.num_docs() : vocab;
  input_ = Matrix(projection_rows_, options_.dim);
  output_ = Matrix(projection_rows_, options_.dim);
  // Input rows start uniform in [-0.5/T, 0.5/T]; output rows start at zero
  // so initial scores sit near the logistic midpoint.
  Rng init(Rng::derive(options_.seed, 0x494E4954ULL));
  const double half = 0.5 / options_.dim;
  for (double& v : input_.data()) v = init.uniform(-half, half);
}

std::size_t CbowTrainer::parameter_count() const {
  return input_.size() + output_.size();
}

Matrix CbowTrainer::train() {
  const int vocab = corpus_.num_words();
  const bool doc_mode = mode_ == Mode::kDocuments;

  long total_positions = 0;
  for (const auto& doc : corpus_.docs) {
    total_positions += static_cast<long>(doc.tokens.size());
  }
  long pairs = 0;
  for (const auto& doc : corpus_.docs) {
    int len = static_cast<int>(doc.tokens.size());
    if (doc_mode) {
      pairs += len;  // the document row always contributes context
    } else if (len > 1) {
      pairs += len;
    }
  }
  if (pairs == 0) {
    throw Error(ErrorCode::kDegenerateCorpus,
                "no (centre, context) pair exists; documents are too short");
  }

  NoiseDistribution noise(corpus_.vocab.frequencies(), options_.noise_exponent);
  Rng rng(Rng::derive(options_.seed, 0x4E454753ULL));

  const double lr_min = options_.lr_start * 1e-4;
  const double total_steps =
      static_cast<double>(options_.epochs) * static_cast<double>(total_positions);
  long step = 0;
  std::vector<int> context;
  context.reserve(2 * options_.window + 2);

  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    for (const auto& doc : corpus_.docs) {
      const auto& toks = doc.tokens;
      const int len = static_cast<int>(toks.size());
      for (int i = 0; i < len; ++i, ++step) {
        double progress = static_cast<double>(step) / total_steps;
        double lr = std::max(options_.lr_start * (1.0 - progress), lr_min);
        context.clear();
        int lo = std::max(0, i - options_.window);
        int hi = std::min(len - 1, i + options_.window);
        for (int j = lo; j <= hi; ++j) {
          if (j != i) context.push_back(toks[j]);
        }
        if (doc_mode) context.push_back(vocab + doc.id);
        if (context.empty()) continue;
        std::vector<int> negatives =
            vocab >= 2 ? sample_negatives(noise, options_.negatives, toks[i], rng)
                       : std::vector<int>{};
        sgns_step(input_, output_, context, toks[i], negatives, lr,
                  options_.average_context);
      }
    }
  }

  if (doc_mode) {
    Matrix docs(corpus_.num_docs(), options_.dim);
    for (int k = 0; k < corpus_.num_docs(); ++k) {
      const double* src = input_.row(vocab + k);
      std::copy(src, src + options_.dim, docs.row(k));
    }
    return docs;
  }
  Matrix words(vocab, options_.dim);
  for (int w = 0; w < vocab; ++w) {
    const double* src = input_.row(w);
    std::copy(src, src + options_.dim, words.row(w));
  }
  return words;
}

Matrix train_word2vec(const Corpus& corpus, const CbowOptions& options) {
  CbowTrainer trainer(corpus, options, CbowTrainer::Mode::kWords);
  return trainer.train();
}

Matrix train_doc2vec(const Corpus& corpus, const CbowOptions& options) {
  CbowTrainer trainer(corpus, options, CbowTrainer::Mode::kDocuments);
  return trainer.train();
}

void save_embeddings(const std::string& path,
                     const std::vector<std::string>& row_keys,
                     const Matrix& values) {
  if (static_cast<int>(row_keys.size()) != values.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "row key count != matrix rows");
  }
  std::ostringstream out;
  out << "#dim=" << values.cols() << '\n';
  out.precision(17);
  for (int r = 0; r < values.rows(); ++r) {
    out << row_keys[r];
    const double* p = values.row(r);
    for (int c = 0; c < values.cols(); ++c) out << '\t' << p[c];
    out << '\n';
  }
  atomic_write(path, out.str());
}

Matrix load_embeddings(const std::string& path,
                       const std::vector<std::string>& row_keys,
                       int expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#dim=", 0) != 0) {
    throw Error(ErrorCode::kIo, "missing #dim header in " + path);
  }
  int file_dim = std::stoi(line.substr(5));
  if (file_dim != expected_dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "embedding file has dim " + std::to_string(file_dim) +
                    ", expected " + std::to_string(expected_dim));
  }
  std::unordered_map<std::string, int> key_to_row;
  for (std::size_t i = 0; i < row_keys.size(); ++i) {
    key_to_row.emplace(row_keys[i], static_cast<int>(i));
  }
  Matrix values(static_cast<int>(row_keys.size()), expected_dim);
  std::vector<bool> seen(row_keys.size(), false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string key;
    if (!std::getline(ss, key, '\t')) continue;
    auto it = key_to_row.find(key);
    if (it == key_to_row.end()) continue;  // extra rows are ignored
    double* p = values.row(it->second);
    std::string field;
    int c = 0;
    while (c < expected_dim && std::getline(ss, field, '\t')) {
      p[c++] = std::stod(field);
    }
    if (c != expected_dim) {
      throw Error(ErrorCode::kShapeMismatch,
                  "row '" + key + "' has " + std::to_string(c) + " values");
    }
    seen[it->second] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::kMissingRow, "missing embedding row '" + row_keys[i] + "'");
    }
  }
  return values;
}

std::vector<std::string> word_row_keys(const Corpus& corpus) {
  return corpus.vocab.tokens();
}

std::vector<std::string> doc_row_keys(const Corpus& corpus) {
  std::vector<std::string> keys;
  keys.reserve(corpus.num_docs());
  for (int k = 0; k < corpus.num_docs(); ++k) {
    keys.push_back("doc:" + std::to_string(k));
  }
  return keys;
}

}  // namespace msgcn
