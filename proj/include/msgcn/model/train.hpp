#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgcn/corpus/corpus.hpp"
#include "msgcn/graph/build.hpp"
#include "msgcn/model/network.hpp"

namespace msgcn {

struct AdamOptions {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  GradientSet m;
  GradientSet v;
  long step = 0;

  static AdamState like(const ModelParams& params);
};

// One bias-corrected Adam update, in place.
void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const AdamOptions& options);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_accuracy;
  int best_epoch = -1;         // 1-based epoch whose parameters were kept
  double best_val_loss = 0.0;
  int epochs_run = 0;
  std::string stopping_reason;  // "patience" or "max_epochs"
};

struct TrainResult {
  ModelParams params;  // snapshot from the best validation epoch
  AdamState adam;      // optimizer state at that same epoch
  TrainHistory history;
};

// Full-batch training with early stopping on validation loss. Labels are
// per document; masks are built from the split assignment. Throws
// kDivergence if loss or parameters leave the finite range.
TrainResult train_model(const MultiEdgeGraph& graph, const SplitAssignment& splits,
                        const std::vector<int>& doc_labels, int num_classes,
                        const TrainConfig& config, bool quiet = true);

struct Prediction {
  std::vector<int> classes;  // per requested node, ties toward the lower id
  Matrix probabilities;      // softmax rows in the same order
};

Prediction predict(const MultiEdgeGraph& graph, const ModelParams& params,
                   const TrainConfig& config, int num_classes,
                   const std::vector<int>& node_ids);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& expected);

struct Checkpoint {
  TrainConfig config;
  int num_classes = 0;
  ModelParams params;
  AdamState adam;
  TrainHistory history;
};

// Bit-exact round trip: doubles are serialized as IEEE-754 bit patterns.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string to_string(Pooling pooling);
Pooling pooling_from_string(const std::string& name);
std::string to_string(StreamMode mode);
StreamMode stream_mode_from_string(const std::string& name);
std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

}  // namespace msgcn
