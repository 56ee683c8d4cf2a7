#include "msgcn/harness/baseline.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "msgcn/core/error.hpp"
#include "msgcn/core/matrix.hpp"
#include "msgcn/graph/build.hpp"

namespace msgcn {
namespace {

// Per-document (word id, weight) lists from the word-by-document TF-IDF matrix.
std::vector<std::vector<std::pair<int, double>>> doc_features(const Corpus& corpus) {
  SparseMatrix weights = tfidf(corpus, TfidfVariant::kRaw);
  std::vector<std::vector<std::pair<int, double>>> rows(corpus.num_docs());
  for (int w = 0; w < weights.n_rows(); ++w) {
    auto docs = weights.row_cols(w);
    auto vals = weights.row_values(w);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      rows[docs[i]].emplace_back(w, vals[i]);
    }
  }
  return rows;
}

}  // namespace

RunReport baseline_tfidf_lr(const Corpus& corpus, const SplitAssignment& splits,
                            const BaselineOptions& options) {
  if (splits.train_ids.empty()) {
    throw Error(ErrorCode::kEmptyMask, "baseline needs a non-empty training split");
  }
  int classes = corpus.num_classes();
  int words = corpus.num_words();
  auto features = doc_features(corpus);

  Matrix w(words, classes);
  std::vector<double> bias(classes, 0.0);

  auto logits_of = [&](int doc) {
    std::vector<double> z(bias);
    for (const auto& [word, value] : features[doc]) {
      const double* row = w.row(word);
      for (int c = 0; c < classes; ++c) z[c] += value * row[c];
    }
    return z;
  };
  auto probs_of = [&](int doc) {
    std::vector<double> z = logits_of(doc);
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : z) hi = std::max(hi, v);
    double total = 0.0;
    for (double& v : z) {
      v = std::exp(v - hi);
      total += v;
    }
    for (double& v : z) v /= total;
    return z;
  };

  double inv_n = 1.0 / static_cast<double>(splits.train_ids.size());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Matrix grad_w(words, classes);
    std::vector<double> grad_b(classes, 0.0);
    for (int doc : splits.train_ids) {
      std::vector<double> p = probs_of(doc);
      p[corpus.docs[doc].label] -= 1.0;
      for (int c = 0; c < classes; ++c) grad_b[c] += p[c] * inv_n;
      for (const auto& [word, value] : features[doc]) {
        double* row = grad_w.row(word);
        for (int c = 0; c < classes; ++c) row[c] += value * p[c] * inv_n;
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      w.data()[i] -= options.lr * (grad_w.data()[i] + options.l2 * w.data()[i]);
    }
    for (int c = 0; c < classes; ++c) bias[c] -= options.lr * grad_b[c];
  }

  auto predict_split = [&](const std::vector<int>& ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (int doc : ids) {
      std::vector<double> z = logits_of(doc);
      int best = 0;
      for (int c = 1; c < classes; ++c) {
        if (z[c] > z[best]) best = c;
      }
      out.push_back(best);
    }
    return out;
  };
  auto labels_of = [&](const std::vector<int>& ids) {
    std::vector<int> out;
    out.reserve(ids.size());
    for (int doc : ids) out.push_back(corpus.docs[doc].label);
    return out;
  };

  RunReport report;
  report.dataset = "baseline";
  report.num_classes = classes;
  report.parameter_count = w.size() + bias.size();
  char note[128];
  std::snprintf(note, sizeof(note),
                "tfidf+lr baseline: lr %.3g, %d epochs, l2 %.3g, full-batch", options.lr,
                options.epochs, options.l2);
  report.note = note;
  report.train = split_metrics(labels_of(splits.train_ids), predict_split(splits.train_ids));
  if (!splits.val_ids.empty()) {
    report.val = split_metrics(labels_of(splits.val_ids), predict_split(splits.val_ids));
  }
  if (!splits.test_ids.empty()) {
    std::vector<int> expected = labels_of(splits.test_ids);
    std::vector<int> predicted = predict_split(splits.test_ids);
    report.test = split_metrics(expected, predicted);
    report.confusion = confusion_matrix(expected, predicted, classes);
    precision_recall(report.confusion, report.precision, report.recall);
  }
  report.epochs_run = options.epochs;
  report.stopping_reason = "fixed epochs";
  return report;
}

}  // namespace msgcn
