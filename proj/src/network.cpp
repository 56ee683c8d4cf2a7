#include "msgcn/model/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <thread>

#include "msgcn/core/error.hpp"

namespace msgcn {
namespace {

void parallel_for_streams(int count, int threads, const std::function<void(int)>& body) {
  int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int t = 0; t < count; ++t) body(t);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int t = w; t < count; t += workers) body(t);
    });
  }
  for (auto& th : pool) th.join();
}

double activate(double z, Activation act, double slope) {
  switch (act) {
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kLeakyRelu:
      return z > 0.0 ? z : slope * z;
    case Activation::kLinear:
      return z;
  }
  return z;
}

double activate_deriv(double z, Activation act, double slope) {
  switch (act) {
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyRelu:
      return z > 0.0 ? 1.0 : slope;
    case Activation::kLinear:
      return 1.0;
  }
  return 1.0;
}

Matrix apply_mask(const Matrix& input, const Matrix* mask) {
  Matrix out = input;
  if (mask != nullptr) {
    if (!mask->same_shape(input)) {
      throw Error(ErrorCode::kShapeMismatch, "dropout mask shape mismatch");
    }
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= mask->data()[i];
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (streams < 1) throw Error(ErrorCode::kInvalidConfig, "streams must be >= 1");
  if (hidden_width < 1) throw Error(ErrorCode::kInvalidConfig, "hidden_width must be >= 1");
  if (hidden_layers < 1) throw Error(ErrorCode::kInvalidConfig, "hidden_layers must be >= 1");
  if (activation == Activation::kLinear) {
    throw Error(ErrorCode::kInvalidConfig, "hidden activation must be relu or leaky_relu");
  }
  if (!(lr > 0.0)) throw Error(ErrorCode::kInvalidConfig, "lr must be positive");
  if (dropout < 0.0 || dropout >= 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "dropout must be in [0, 1)");
  }
  if (max_epochs < 1) throw Error(ErrorCode::kInvalidConfig, "max_epochs must be >= 1");
  if (patience < 1 || patience > max_epochs) {
    throw Error(ErrorCode::kInvalidConfig, "patience must be in [1, max_epochs]");
  }
  if (threads < 1) throw Error(ErrorCode::kInvalidConfig, "threads must be >= 1");
}

ModelParams ModelParams::init(int input_dim, int num_classes, const TrainConfig& config) {
  config.validate();
  if (input_dim < 1 || num_classes < 1) {
    throw Error(ErrorCode::kInvalidConfig, "input_dim and num_classes must be >= 1");
  }
  ModelParams params;
  params.mode_ = config.mode;
  params.streams_ = config.streams;
  int layers = config.hidden_layers + 1;
  int copies = params.copies_per_layer();
  params.layers_.resize(layers);
  for (int l = 0; l < layers; ++l) {
    int fan_in = l == 0 ? input_dim : config.streams * config.hidden_width;
    int fan_out = l < layers - 1 ? config.hidden_width : num_classes;
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    params.layers_[l].reserve(copies);
    for (int t = 0; t < copies; ++t) {
      std::uint64_t salt = (static_cast<std::uint64_t>(l) << 32) | static_cast<std::uint64_t>(t);
      Rng rng(Rng::derive(Rng::derive(config.seed, 0x57494E49u), salt));
      Matrix w(fan_in, fan_out);
      for (std::size_t i = 0; i < w.size(); ++i) {
        w.data()[i] = rng.uniform(-limit, limit);
      }
      params.layers_[l].push_back(std::move(w));
    }
  }
  return params;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) {
    for (const auto& w : layer) total += w.size();
  }
  return total;
}

bool ModelParams::all_finite() const {
  for (const auto& layer : layers_) {
    for (const auto& w : layer) {
      if (!w.all_finite()) return false;
    }
  }
  return true;
}

ModelParams ModelParams::from_tensors(StreamMode mode, int streams,
                                      std::vector<std::vector<Matrix>> layers) {
  ModelParams params;
  params.mode_ = mode;
  params.streams_ = streams;
  params.layers_ = std::move(layers);
  int copies = params.copies_per_layer();
  for (const auto& layer : params.layers_) {
    if (static_cast<int>(layer.size()) != copies) {
      throw Error(ErrorCode::kShapeMismatch, "parameter tensor has wrong stream count");
    }
  }
  return params;
}

std::vector<Matrix> ms_layer_forward(const std::vector<SparseMatrix>& adjacency,
                                     const Matrix& input,
                                     const std::vector<Matrix>& stream_weights,
                                     Activation activation, double leaky_slope,
                                     const Matrix* dropout_mask, int threads) {
  int streams = static_cast<int>(adjacency.size());
  if (streams == 0) throw Error(ErrorCode::kShapeMismatch, "layer needs at least one stream");
  bool shared = stream_weights.size() == 1;
  if (!shared && static_cast<int>(stream_weights.size()) != streams) {
    throw Error(ErrorCode::kShapeMismatch, "stream weight count mismatch");
  }
  Matrix dropped = apply_mask(input, dropout_mask);
  std::vector<Matrix> outputs(streams);
  parallel_for_streams(streams, threads, [&](int t) {
    const Matrix& w = stream_weights[shared ? 0 : t];
    Matrix projected = matmul(dropped, w);
    Matrix out = adjacency[t].multiply(projected);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out.data()[i] = activate(out.data()[i], activation, leaky_slope);
    }
    outputs[t] = std::move(out);
  });
  return outputs;
}

Matrix concat_streams(const std::vector<Matrix>& streams) {
  if (streams.empty()) throw Error(ErrorCode::kShapeMismatch, "nothing to concatenate");
  int rows = streams.front().rows();
  int width = 0;
  for (const auto& m : streams) {
    if (m.rows() != rows) throw Error(ErrorCode::kShapeMismatch, "stream row counts differ");
    width += m.cols();
  }
  Matrix out(rows, width);
  int offset = 0;
  for (const auto& m : streams) {
    for (int r = 0; r < rows; ++r) {
      const double* src = m.row(r);
      double* dst = out.row(r) + offset;
      std::copy(src, src + m.cols(), dst);
    }
    offset += m.cols();
  }
  return out;
}

PoolResult pool_streams(const std::vector<Matrix>& streams, Pooling method) {
  if (streams.empty()) throw Error(ErrorCode::kShapeMismatch, "nothing to pool");
  int rows = streams.front().rows();
  int cols = streams.front().cols();
  for (const auto& m : streams) {
    if (m.rows() != rows || m.cols() != cols) {
      throw Error(ErrorCode::kShapeMismatch, "pooled streams must share a shape");
    }
  }
  int count = static_cast<int>(streams.size());
  PoolResult result;
  result.values = Matrix(rows, cols);
  if (method == Pooling::kAvg) {
    for (const auto& m : streams) {
      for (std::size_t i = 0; i < m.size(); ++i) result.values.data()[i] += m.data()[i];
    }
    double inv = 1.0 / count;
    for (std::size_t i = 0; i < result.values.size(); ++i) result.values.data()[i] *= inv;
    return result;
  }
  result.choice.assign(static_cast<std::size_t>(rows) * cols, 0);
  result.values = streams[0];
  for (int t = 1; t < count; ++t) {
    const Matrix& m = streams[t];
    for (std::size_t i = 0; i < m.size(); ++i) {
      double v = m.data()[i];
      double best = result.values.data()[i];
      bool better = method == Pooling::kMax ? v > best : v < best;
      if (better) {
        result.values.data()[i] = v;
        result.choice[i] = t;
      }
    }
  }
  return result;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (int r = 0; r < logits.rows(); ++r) {
    const double* z = logits.row(r);
    double hi = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < logits.cols(); ++c) hi = std::max(hi, z[c]);
    double total = 0.0;
    for (int c = 0; c < logits.cols(); ++c) {
      double e = std::exp(z[c] - hi);
      probs(r, c) = e;
      total += e;
    }
    for (int c = 0; c < logits.cols(); ++c) probs(r, c) /= total;
  }
  return probs;
}

double masked_softmax_xent(const Matrix& logits, const std::vector<int>& labels,
                           const std::vector<int>& mask) {
  if (mask.empty()) throw Error(ErrorCode::kEmptyMask, "loss mask is empty");
  if (static_cast<int>(labels.size()) != logits.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "label count must match logit rows");
  }
  double total = 0.0;
  for (int node : mask) {
    if (node < 0 || node >= logits.rows()) {
      throw Error(ErrorCode::kShapeMismatch, "mask node out of range");
    }
    int label = labels[node];
    if (label < 0 || label >= logits.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "masked node lacks a valid label");
    }
    const double* z = logits.row(node);
    double hi = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < logits.cols(); ++c) hi = std::max(hi, z[c]);
    double lse = 0.0;
    for (int c = 0; c < logits.cols(); ++c) lse += std::exp(z[c] - hi);
    total += std::log(lse) - (z[label] - hi);
  }
  return total / static_cast<double>(mask.size());
}

Network::Network(const MultiEdgeGraph& graph, const TrainConfig& config, int num_classes)
    : graph_(graph), config_(config), num_classes_(num_classes) {
  config_.validate();
  if (num_classes_ < 1) throw Error(ErrorCode::kInvalidConfig, "need at least one class");
  if (config_.streams != graph_.dims) {
    throw Error(ErrorCode::kShapeMismatch,
                "stream count must match the graph edge dimension");
  }
  if (graph_.node_features.cols() != graph_.dims) {
    throw Error(ErrorCode::kShapeMismatch, "node feature width must match edge dimension");
  }
}

int Network::layer_input_dim(int layer) const {
  return layer == 0 ? graph_.dims : config_.streams * config_.hidden_width;
}

int Network::layer_output_dim(int layer) const {
  return layer < num_layers() - 1 ? config_.hidden_width : num_classes_;
}

Matrix Network::forward_hidden(const ModelParams& params) const {
  Matrix h = graph_.node_features;
  for (int l = 0; l < num_layers() - 1; ++l) {
    std::vector<Matrix> weights;
    weights.reserve(params.copies_per_layer());
    for (int t = 0; t < params.copies_per_layer(); ++t) {
      weights.push_back(params.tensors()[l][t]);
    }
    std::vector<Matrix> streams = ms_layer_forward(graph_.normalized, h, weights,
                                                   config_.activation, config_.leaky_slope,
                                                   nullptr, config_.threads);
    h = concat_streams(streams);
  }
  return h;
}

Matrix Network::forward(const ModelParams& params) const {
  Matrix h = graph_.node_features;
  int layers = num_layers();
  for (int l = 0; l < layers; ++l) {
    std::vector<Matrix> weights;
    weights.reserve(params.copies_per_layer());
    for (int t = 0; t < params.copies_per_layer(); ++t) {
      weights.push_back(params.tensors()[l][t]);
    }
    Activation act = l < layers - 1 ? config_.activation : Activation::kLinear;
    std::vector<Matrix> streams = ms_layer_forward(graph_.normalized, h, weights, act,
                                                   config_.leaky_slope, nullptr,
                                                   config_.threads);
    if (l < layers - 1) {
      h = concat_streams(streams);
    } else {
      return pool_streams(streams, config_.pooling).values;
    }
  }
  throw Error(ErrorCode::kInvalidConfig, "network has no layers");
}

Matrix Network::forward_train(const ModelParams& params, Rng& rng, Cache& cache) const {
  int layers = num_layers();
  cache.dropped.clear();
  cache.dropout_masks.clear();
  cache.preact.assign(layers, {});
  Matrix h = graph_.node_features;
  for (int l = 0; l < layers; ++l) {
    Matrix mask;
    if (config_.dropout > 0.0) {
      mask = Matrix(h.rows(), h.cols());
      double keep = 1.0 - config_.dropout;
      double scale = 1.0 / keep;
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask.data()[i] = rng.uniform() < config_.dropout ? 0.0 : scale;
      }
    }
    Matrix dropped = apply_mask(h, mask.size() > 0 ? &mask : nullptr);
    cache.dropout_masks.push_back(std::move(mask));
    cache.dropped.push_back(dropped);

    bool shared = params.mode() == StreamMode::kShared;
    std::vector<Matrix>& pre = cache.preact[l];
    pre.assign(config_.streams, Matrix());
    parallel_for_streams(config_.streams, config_.threads, [&](int t) {
      const Matrix& w = params.tensors()[l][shared ? 0 : t];
      Matrix projected = matmul(dropped, w);
      pre[t] = graph_.normalized[t].multiply(projected);
    });

    if (l < layers - 1) {
      std::vector<Matrix> activated(config_.streams);
      for (int t = 0; t < config_.streams; ++t) {
        activated[t] = pre[t];
        for (std::size_t i = 0; i < activated[t].size(); ++i) {
          activated[t].data()[i] =
              activate(activated[t].data()[i], config_.activation, config_.leaky_slope);
        }
      }
      h = concat_streams(activated);
    } else {
      cache.pooled = pool_streams(pre, config_.pooling);
      return cache.pooled.values;
    }
  }
  throw Error(ErrorCode::kInvalidConfig, "network has no layers");
}

GradientSet Network::backward(const ModelParams& params, const Cache& cache,
                              const std::vector<int>& labels,
                              const std::vector<int>& mask) const {
  if (mask.empty()) throw Error(ErrorCode::kEmptyMask, "loss mask is empty");
  int layers = num_layers();
  int streams = config_.streams;
  bool shared = params.mode() == StreamMode::kShared;
  const Matrix& logits = cache.pooled.values;
  int n = logits.rows();
  int classes = logits.cols();

  // d(loss)/d(logits): averaged softmax-minus-onehot on masked rows.
  Matrix grad_logits(n, classes);
  double inv = 1.0 / static_cast<double>(mask.size());
  for (int node : mask) {
    const double* z = logits.row(node);
    double hi = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < classes; ++c) hi = std::max(hi, z[c]);
    double total = 0.0;
    for (int c = 0; c < classes; ++c) total += std::exp(z[c] - hi);
    for (int c = 0; c < classes; ++c) {
      grad_logits(node, c) = std::exp(z[c] - hi) / total * inv;
    }
    grad_logits(node, labels[node]) -= inv;
  }

  GradientSet grads(layers);
  for (int l = 0; l < layers; ++l) {
    grads[l].assign(params.copies_per_layer(),
                    Matrix(layer_input_dim(l), layer_output_dim(l)));
  }

  // Gradient w.r.t. each output-layer stream, routed through the pooling.
  std::vector<Matrix> grad_pre(streams);
  for (int t = 0; t < streams; ++t) grad_pre[t] = Matrix(n, classes);
  if (config_.pooling == Pooling::kAvg) {
    double share = 1.0 / streams;
    for (int t = 0; t < streams; ++t) {
      for (std::size_t i = 0; i < grad_logits.size(); ++i) {
        grad_pre[t].data()[i] = grad_logits.data()[i] * share;
      }
    }
  } else {
    for (std::size_t i = 0; i < grad_logits.size(); ++i) {
      grad_pre[cache.pooled.choice[i]].data()[i] = grad_logits.data()[i];
    }
  }

  for (int l = layers - 1; l >= 0; --l) {
    const Matrix& dropped = cache.dropped[l];
    std::vector<Matrix> grad_weight(streams);
    std::vector<Matrix> grad_input(streams);
    bool need_input = l > 0;
    parallel_for_streams(streams, config_.threads, [&](int t) {
      // A^(t) is symmetric, so (A^(t))^T dZ = A^(t) dZ.
      Matrix routed = graph_.normalized[t].multiply(grad_pre[t]);
      grad_weight[t] = matmul_at_b(dropped, routed);
      if (need_input) {
        grad_input[t] = matmul_a_bt(routed, params.tensors()[l][shared ? 0 : t]);
      }
    });
    for (int t = 0; t < streams; ++t) {
      add_in_place(grads[l][shared ? 0 : t], grad_weight[t]);
    }

    if (l == 0) break;

    Matrix grad_h(dropped.rows(), dropped.cols());
    for (int t = 0; t < streams; ++t) add_in_place(grad_h, grad_input[t]);
    if (cache.dropout_masks[l].size() > 0) {
      for (std::size_t i = 0; i < grad_h.size(); ++i) {
        grad_h.data()[i] *= cache.dropout_masks[l].data()[i];
      }
    }

    // Split the concatenated gradient back into streams and push each
    // through its activation.
    int prev = l - 1;
    int width = config_.hidden_width;
    grad_pre.assign(streams, Matrix());
    for (int t = 0; t < streams; ++t) {
      const Matrix& pre = cache.preact[prev][t];
      Matrix dz(pre.rows(), pre.cols());
      for (int r = 0; r < pre.rows(); ++r) {
        const double* gh = grad_h.row(r) + static_cast<std::size_t>(t) * width;
        for (int c = 0; c < width; ++c) {
          dz(r, c) = gh[c] * activate_deriv(pre(r, c), config_.activation,
                                            config_.leaky_slope);
        }
      }
      grad_pre[t] = std::move(dz);
    }
  }
  return grads;
}

}  // namespace msgcn
