#pragma once

#include "msgcn/corpus/corpus.hpp"
#include "msgcn/harness/report.hpp"

namespace msgcn {

struct BaselineOptions {
  double lr = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
};

// Multinomial logistic regression on TF-IDF document vectors, trained
// full-batch by gradient descent on the labelled training split. Serves as
// the comparison floor for the graph model.
RunReport baseline_tfidf_lr(const Corpus& corpus, const SplitAssignment& splits,
                            const BaselineOptions& options = {});

}  // namespace msgcn
