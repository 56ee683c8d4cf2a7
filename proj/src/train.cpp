#include "msgcn/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <utility>

#include <json.hpp>

#include "msgcn/core/error.hpp"
#include "msgcn/core/io.hpp"

namespace msgcn {
namespace {

GradientSet zeros_like(const ModelParams& params) {
  GradientSet out(params.num_layers());
  for (int l = 0; l < params.num_layers(); ++l) {
    for (const auto& w : params.tensors()[l]) {
      out[l].emplace_back(w.rows(), w.cols());
    }
  }
  return out;
}

std::vector<int> doc_mask(const MultiEdgeGraph& graph, const std::vector<int>& doc_ids) {
  std::vector<int> mask;
  mask.reserve(doc_ids.size());
  for (int id : doc_ids) mask.push_back(graph.doc_node(id));
  return mask;
}

int argmax_row(const Matrix& m, int row) {
  int best = 0;
  for (int c = 1; c < m.cols(); ++c) {
    if (m(row, c) > m(row, best)) best = c;
  }
  return best;
}

nlohmann::json matrix_bits(const Matrix& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<std::uint64_t> bits(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    double v = m.data()[i];
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(v));
    std::memcpy(&u, &v, sizeof(u));
    bits[i] = u;
  }
  j["bits"] = bits;
  return j;
}

Matrix matrix_from_bits(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  auto bits = j.at("bits").get<std::vector<std::uint64_t>>();
  if (bits.size() != m.size()) {
    throw Error(ErrorCode::kIo, "checkpoint matrix payload size mismatch");
  }
  for (std::size_t i = 0; i < bits.size(); ++i) {
    double v;
    std::memcpy(&v, &bits[i], sizeof(v));
    m.data()[i] = v;
  }
  return m;
}

}  // namespace

AdamState AdamState::like(const ModelParams& params) {
  AdamState state;
  state.m = zeros_like(params);
  state.v = zeros_like(params);
  state.step = 0;
  return state;
}

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const AdamOptions& options) {
  state.step += 1;
  double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (int l = 0; l < params.num_layers(); ++l) {
    for (std::size_t t = 0; t < params.tensors()[l].size(); ++t) {
      Matrix& w = params.tensors()[l][t];
      const Matrix& g = grads[l][t];
      Matrix& m = state.m[l][t];
      Matrix& v = state.v[l][t];
      if (!w.same_shape(g)) {
        throw Error(ErrorCode::kShapeMismatch, "gradient shape mismatch in adam step");
      }
      for (std::size_t i = 0; i < w.size(); ++i) {
        double gi = g.data()[i];
        m.data()[i] = options.beta1 * m.data()[i] + (1.0 - options.beta1) * gi;
        v.data()[i] = options.beta2 * v.data()[i] + (1.0 - options.beta2) * gi * gi;
        double mhat = m.data()[i] / bc1;
        double vhat = v.data()[i] / bc2;
        w.data()[i] -= options.lr * mhat / (std::sqrt(vhat) + options.eps);
      }
    }
  }
}

TrainResult train_model(const MultiEdgeGraph& graph, const SplitAssignment& splits,
                        const std::vector<int>& doc_labels, int num_classes,
                        const TrainConfig& config, bool quiet) {
  Network net(graph, config, num_classes);
  ModelParams params = ModelParams::init(graph.dims, num_classes, config);

  std::vector<int> labels(graph.n_nodes(), kUnlabelled);
  for (std::size_t d = 0; d < doc_labels.size(); ++d) {
    labels[graph.doc_node(static_cast<int>(d))] = doc_labels[d];
  }
  std::vector<int> train_mask = doc_mask(graph, splits.train_ids);
  std::vector<int> val_mask = doc_mask(graph, splits.val_ids);
  if (train_mask.empty()) throw Error(ErrorCode::kEmptyMask, "training split is empty");
  // Without a validation split the stopping criterion falls back to the
  // training loss of the dropout-free forward pass.
  const std::vector<int>& monitor_mask = val_mask.empty() ? train_mask : val_mask;

  AdamState adam = AdamState::like(params);
  AdamOptions adam_options;
  adam_options.lr = config.lr;
  Rng dropout_rng(Rng::derive(config.seed, 0x44524F50u));

  TrainHistory history;
  double best = std::numeric_limits<double>::infinity();
  ModelParams best_params = params;
  AdamState best_adam = adam;
  int since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Network::Cache cache;
    Matrix logits = net.forward_train(params, dropout_rng, cache);
    double train_loss = masked_softmax_xent(logits, labels, train_mask);
    GradientSet grads = net.backward(params, cache, labels, train_mask);
    adam_step(params, grads, adam, adam_options);

    Matrix eval_logits = net.forward(params);
    double monitor_loss = masked_softmax_xent(eval_logits, labels, monitor_mask);
    double monitor_acc = 0.0;
    for (int node : monitor_mask) {
      if (argmax_row(eval_logits, node) == labels[node]) monitor_acc += 1.0;
    }
    monitor_acc /= static_cast<double>(monitor_mask.size());

    if (!std::isfinite(train_loss) || !std::isfinite(monitor_loss) || !params.all_finite()) {
      throw Error(ErrorCode::kDivergence, "training diverged at epoch " + std::to_string(epoch));
    }

    history.train_loss.push_back(train_loss);
    history.val_loss.push_back(monitor_loss);
    history.val_accuracy.push_back(monitor_acc);
    history.epochs_run = epoch;

    if (monitor_loss < best) {
      best = monitor_loss;
      best_params = params;
      best_adam = adam;
      history.best_epoch = epoch;
      since_best = 0;
    } else {
      since_best += 1;
    }
    if (!quiet && (epoch % 100 == 0 || epoch == 1)) {
      std::fprintf(stderr, "epoch %4d  train %.4f  val %.4f  val_acc %.4f\n", epoch,
                   train_loss, monitor_loss, monitor_acc);
    }
    if (since_best >= config.patience) {
      history.stopping_reason = "patience";
      break;
    }
  }
  if (history.stopping_reason.empty()) history.stopping_reason = "max_epochs";
  history.best_val_loss = best;

  TrainResult result;
  result.params = std::move(best_params);
  result.adam = std::move(best_adam);
  result.history = std::move(history);
  return result;
}

Prediction predict(const MultiEdgeGraph& graph, const ModelParams& params,
                   const TrainConfig& config, int num_classes,
                   const std::vector<int>& node_ids) {
  Network net(graph, config, num_classes);
  Matrix logits = net.forward(params);
  Prediction out;
  out.classes.reserve(node_ids.size());
  out.probabilities = Matrix(static_cast<int>(node_ids.size()), num_classes);
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    int node = node_ids[i];
    if (node < 0 || node >= logits.rows()) {
      throw Error(ErrorCode::kShapeMismatch, "prediction node out of range");
    }
    out.classes.push_back(argmax_row(logits, node));
    Matrix row(1, num_classes);
    for (int c = 0; c < num_classes; ++c) row(0, c) = logits(node, c);
    Matrix probs = softmax_rows(row);
    for (int c = 0; c < num_classes; ++c) out.probabilities(static_cast<int>(i), c) = probs(0, c);
  }
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& expected) {
  if (predicted.size() != expected.size() || predicted.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "accuracy needs matching non-empty vectors");
  }
  double hits = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == expected[i]) hits += 1.0;
  }
  return hits / static_cast<double>(predicted.size());
}

std::string to_string(Pooling pooling) {
  switch (pooling) {
    case Pooling::kMax: return "max";
    case Pooling::kAvg: return "avg";
    case Pooling::kMin: return "min";
  }
  return "max";
}

Pooling pooling_from_string(const std::string& name) {
  if (name == "max") return Pooling::kMax;
  if (name == "avg" || name == "mean") return Pooling::kAvg;
  if (name == "min") return Pooling::kMin;
  throw Error(ErrorCode::kInvalidConfig, "unknown pooling '" + name + "'");
}

std::string to_string(StreamMode mode) {
  return mode == StreamMode::kShared ? "shared" : "separated";
}

StreamMode stream_mode_from_string(const std::string& name) {
  if (name == "shared") return StreamMode::kShared;
  if (name == "separated") return StreamMode::kSeparated;
  throw Error(ErrorCode::kInvalidConfig, "unknown stream mode '" + name + "'");
}

std::string to_string(Activation activation) {
  switch (activation) {
    case Activation::kRelu: return "relu";
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kLinear: return "linear";
  }
  return "relu";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  if (name == "linear") return Activation::kLinear;
  throw Error(ErrorCode::kInvalidConfig, "unknown activation '" + name + "'");
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  nlohmann::json j;
  const TrainConfig& c = checkpoint.config;
  j["config"] = {{"streams", c.streams},
                 {"hidden_width", c.hidden_width},
                 {"hidden_layers", c.hidden_layers},
                 {"pooling", to_string(c.pooling)},
                 {"mode", to_string(c.mode)},
                 {"activation", to_string(c.activation)},
                 {"leaky_slope", c.leaky_slope},
                 {"lr", c.lr},
                 {"dropout", c.dropout},
                 {"max_epochs", c.max_epochs},
                 {"patience", c.patience},
                 {"seed", c.seed},
                 {"threads", c.threads}};
  j["num_classes"] = checkpoint.num_classes;
  j["mode"] = to_string(checkpoint.params.mode());
  j["streams"] = checkpoint.params.streams();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : checkpoint.params.tensors()) {
    nlohmann::json copies = nlohmann::json::array();
    for (const auto& w : layer) copies.push_back(matrix_bits(w));
    layers.push_back(copies);
  }
  j["layers"] = layers;
  auto moments = [](const GradientSet& set) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& layer : set) {
      nlohmann::json copies = nlohmann::json::array();
      for (const auto& m : layer) copies.push_back(matrix_bits(m));
      out.push_back(copies);
    }
    return out;
  };
  j["adam"] = {{"m", moments(checkpoint.adam.m)},
               {"v", moments(checkpoint.adam.v)},
               {"step", checkpoint.adam.step}};
  j["history"] = {{"train_loss", checkpoint.history.train_loss},
                  {"val_loss", checkpoint.history.val_loss},
                  {"val_accuracy", checkpoint.history.val_accuracy},
                  {"best_epoch", checkpoint.history.best_epoch},
                  {"best_val_loss", checkpoint.history.best_val_loss},
                  {"epochs_run", checkpoint.history.epochs_run},
                  {"stopping_reason", checkpoint.history.stopping_reason}};
  atomic_write(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingCheckpoint, "no checkpoint at " + path);
  nlohmann::json j;
  in >> j;
  Checkpoint ckpt;
  const auto& c = j.at("config");
  ckpt.config.streams = c.at("streams").get<int>();
  ckpt.config.hidden_width = c.at("hidden_width").get<int>();
  ckpt.config.hidden_layers = c.at("hidden_layers").get<int>();
  ckpt.config.pooling = pooling_from_string(c.at("pooling").get<std::string>());
  ckpt.config.mode = stream_mode_from_string(c.at("mode").get<std::string>());
  ckpt.config.activation = activation_from_string(c.at("activation").get<std::string>());
  ckpt.config.leaky_slope = c.at("leaky_slope").get<double>();
  ckpt.config.lr = c.at("lr").get<double>();
  ckpt.config.dropout = c.at("dropout").get<double>();
  ckpt.config.max_epochs = c.at("max_epochs").get<int>();
  ckpt.config.patience = c.at("patience").get<int>();
  ckpt.config.seed = c.at("seed").get<std::uint64_t>();
  ckpt.config.threads = c.at("threads").get<int>();
  ckpt.num_classes = j.at("num_classes").get<int>();
  StreamMode mode = stream_mode_from_string(j.at("mode").get<std::string>());
  int streams = j.at("streams").get<int>();
  std::vector<std::vector<Matrix>> layers;
  for (const auto& layer : j.at("layers")) {
    std::vector<Matrix> copies;
    for (const auto& w : layer) copies.push_back(matrix_from_bits(w));
    layers.push_back(std::move(copies));
  }
  ckpt.params = ModelParams::from_tensors(mode, streams, std::move(layers));
  auto moments = [](const nlohmann::json& arr) {
    GradientSet set;
    for (const auto& layer : arr) {
      std::vector<Matrix> copies;
      for (const auto& m : layer) copies.push_back(matrix_from_bits(m));
      set.push_back(std::move(copies));
    }
    return set;
  };
  const auto& a = j.at("adam");
  ckpt.adam.m = moments(a.at("m"));
  ckpt.adam.v = moments(a.at("v"));
  ckpt.adam.step = a.at("step").get<long>();
  const auto& h = j.at("history");
  ckpt.history.train_loss = h.at("train_loss").get<std::vector<double>>();
  ckpt.history.val_loss = h.at("val_loss").get<std::vector<double>>();
  ckpt.history.val_accuracy = h.at("val_accuracy").get<std::vector<double>>();
  ckpt.history.best_epoch = h.at("best_epoch").get<int>();
  ckpt.history.best_val_loss = h.at("best_val_loss").get<double>();
  ckpt.history.epochs_run = h.at("epochs_run").get<int>();
  ckpt.history.stopping_reason = h.at("stopping_reason").get<std::string>();
  return ckpt;
}

}  // namespace msgcn
