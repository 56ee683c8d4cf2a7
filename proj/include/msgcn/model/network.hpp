#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgcn/core/matrix.hpp"
#include "msgcn/core/rng.hpp"
#include "msgcn/graph/build.hpp"

namespace msgcn {

enum class Pooling { kMax, kAvg, kMin };
enum class StreamMode { kSeparated, kShared };
enum class Activation { kRelu, kLeakyRelu, kLinear };

struct TrainConfig {
  int streams = 25;       // T, must equal the graph edge dimension
  int hidden_width = 25;  // d_ms per stream
  int hidden_layers = 1;  // concat layers before the pooled output layer
  Pooling pooling = Pooling::kMax;
  StreamMode mode = StreamMode::kSeparated;
  Activation activation = Activation::kRelu;
  double leaky_slope = 0.01;
  double lr = 0.002;
  double dropout = 0.5;
  int max_epochs = 2000;
  int patience = 100;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

// Per-layer, per-stream weight matrices. Shared mode stores one matrix per
// layer and logically broadcasts it to every stream.
class ModelParams {
 public:
  ModelParams() = default;

  static ModelParams init(int input_dim, int num_classes, const TrainConfig& config);

  StreamMode mode() const { return mode_; }
  int streams() const { return streams_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  int copies_per_layer() const { return mode_ == StreamMode::kShared ? 1 : streams_; }

  const Matrix& weight(int layer, int stream) const {
    return layers_[layer][mode_ == StreamMode::kShared ? 0 : stream];
  }
  std::vector<std::vector<Matrix>>& tensors() { return layers_; }
  const std::vector<std::vector<Matrix>>& tensors() const { return layers_; }

  std::size_t parameter_count() const;
  bool all_finite() const;

  static ModelParams from_tensors(StreamMode mode, int streams,
                                  std::vector<std::vector<Matrix>> layers);

 private:
  StreamMode mode_ = StreamMode::kSeparated;
  int streams_ = 0;
  std::vector<std::vector<Matrix>> layers_;  // [layer][stream or single copy]
};

// Gradients mirror the parameter tensor layout exactly.
using GradientSet = std::vector<std::vector<Matrix>>;

// One multi-stream graph convolution: H_t = act(A^(t) · drop(H) · W^(t)).
// All streams read the same (dropped) input. `stream_weights` holds either
// one matrix per stream or a single shared matrix.
std::vector<Matrix> ms_layer_forward(const std::vector<SparseMatrix>& adjacency,
                                     const Matrix& input,
                                     const std::vector<Matrix>& stream_weights,
                                     Activation activation, double leaky_slope,
                                     const Matrix* dropout_mask, int threads = 1);

// Column-wise concatenation in stream order.
Matrix concat_streams(const std::vector<Matrix>& streams);

struct PoolResult {
  Matrix values;
  // For max/min: selected stream per element, ties toward the lowest
  // stream index; empty for avg.
  std::vector<int> choice;
};

PoolResult pool_streams(const std::vector<Matrix>& streams, Pooling method);

// Mean over masked nodes of -log softmax(logits)[label], max-stabilized.
double masked_softmax_xent(const Matrix& logits, const std::vector<int>& labels,
                           const std::vector<int>& mask);

// Row-wise stable softmax.
Matrix softmax_rows(const Matrix& logits);

// Full forward/backward over the multi-edge graph. The cache kept by the
// training forward holds exactly what the manual backward pass needs.
class Network {
 public:
  Network(const MultiEdgeGraph& graph, const TrainConfig& config, int num_classes);

  struct Cache {
    std::vector<Matrix> dropped;               // per layer: input after dropout
    std::vector<Matrix> dropout_masks;         // per layer: 0 / (1-p)^-1 entries
    std::vector<std::vector<Matrix>> preact;   // per layer, per stream
    PoolResult pooled;
  };

  // Evaluation forward: no dropout, returns pooled logits.
  Matrix forward(const ModelParams& params) const;

  // Concatenated activations after the last hidden layer, no dropout.
  Matrix forward_hidden(const ModelParams& params) const;

  // Training forward: applies dropout masks drawn from `rng` and fills the
  // cache for backward.
  Matrix forward_train(const ModelParams& params, Rng& rng, Cache& cache) const;

  GradientSet backward(const ModelParams& params, const Cache& cache,
                       const std::vector<int>& labels,
                       const std::vector<int>& mask) const;

  int num_classes() const { return num_classes_; }
  int layer_input_dim(int layer) const;
  int layer_output_dim(int layer) const;
  int num_layers() const { return config_.hidden_layers + 1; }

 private:
  const MultiEdgeGraph& graph_;
  TrainConfig config_;
  int num_classes_;
};

}  // namespace msgcn
