#include "msgcn/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msgcn/core/error.hpp"
#include "msgcn/core/io.hpp"
#include "msgcn/core/rng.hpp"
#include "msgcn/model/train.hpp"

namespace msgcn {
namespace {

using nlohmann::json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["corpus"] = {{"path", c.dataset_path},
                 {"format", c.dataset_format},
                 {"dataset", c.dataset_name},
                 {"min_count", c.min_count},
                 {"tokenizer", to_string(c.tokenizer)},
                 {"synthetic",
                  {{"classes", c.synthetic.classes},
                   {"docs_per_class", c.synthetic.docs_per_class},
                   {"vocab_per_class", c.synthetic.vocab_per_class},
                   {"shared_vocab", c.synthetic.shared_vocab},
                   {"doc_length", c.synthetic.doc_length},
                   {"class_token_fraction", c.synthetic.class_token_fraction}}}};
  j["embed"] = {{"dim", c.embed.dim},
                {"window", c.embed.window},
                {"epochs", c.embed.epochs},
                {"negatives", c.embed.negatives},
                {"lr", c.embed.lr_start},
                {"noise_exponent", c.embed.noise_exponent},
                {"average_context", c.embed.average_context}};
  j["graph"] = {{"cooccurrence_window", c.graph.cooccurrence_window},
                {"all_pairs", c.graph.all_pairs},
                {"overlap_threshold", c.graph.doc_overlap_threshold},
                {"tfidf", to_string(c.graph.tfidf_variant)}};
  j["model"] = {{"streams", c.model.streams},
                {"hidden_width", c.model.hidden_width},
                {"hidden_layers", c.model.hidden_layers},
                {"pooling", to_string(c.model.pooling)},
                {"mode", to_string(c.model.mode)},
                {"activation", to_string(c.model.activation)},
                {"leaky_slope", c.model.leaky_slope},
                {"lr", c.model.lr},
                {"dropout", c.model.dropout},
                {"max_epochs", c.model.max_epochs},
                {"patience", c.model.patience}};
  j["run"] = {{"out_dir", c.out_dir},
              {"seed", c.seed},
              {"threads", c.threads},
              {"label_ratio", c.label_ratio},
              {"val_fraction", c.val_fraction}};
  return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c = default_experiment_config();
  if (j.contains("corpus")) {
    const json& s = j.at("corpus");
    maybe(s, "path", c.dataset_path);
    maybe(s, "format", c.dataset_format);
    maybe(s, "dataset", c.dataset_name);
    maybe(s, "min_count", c.min_count);
    if (s.contains("tokenizer")) {
      c.tokenizer = tokenizer_from_string(s.at("tokenizer").get<std::string>());
    }
    if (s.contains("synthetic")) {
      const json& y = s.at("synthetic");
      maybe(y, "classes", c.synthetic.classes);
      maybe(y, "docs_per_class", c.synthetic.docs_per_class);
      maybe(y, "vocab_per_class", c.synthetic.vocab_per_class);
      maybe(y, "shared_vocab", c.synthetic.shared_vocab);
      maybe(y, "doc_length", c.synthetic.doc_length);
      maybe(y, "class_token_fraction", c.synthetic.class_token_fraction);
    }
  }
  if (j.contains("embed")) {
    const json& s = j.at("embed");
    maybe(s, "dim", c.embed.dim);
    maybe(s, "window", c.embed.window);
    maybe(s, "epochs", c.embed.epochs);
    maybe(s, "negatives", c.embed.negatives);
    maybe(s, "lr", c.embed.lr_start);
    maybe(s, "noise_exponent", c.embed.noise_exponent);
    maybe(s, "average_context", c.embed.average_context);
  }
  if (j.contains("graph")) {
    const json& s = j.at("graph");
    maybe(s, "cooccurrence_window", c.graph.cooccurrence_window);
    maybe(s, "all_pairs", c.graph.all_pairs);
    maybe(s, "overlap_threshold", c.graph.doc_overlap_threshold);
    if (s.contains("tfidf")) {
      c.graph.tfidf_variant = tfidf_variant_from_string(s.at("tfidf").get<std::string>());
    }
  }
  if (j.contains("model")) {
    const json& s = j.at("model");
    maybe(s, "streams", c.model.streams);
    maybe(s, "hidden_width", c.model.hidden_width);
    maybe(s, "hidden_layers", c.model.hidden_layers);
    if (s.contains("pooling")) {
      c.model.pooling = pooling_from_string(s.at("pooling").get<std::string>());
    }
    if (s.contains("mode")) {
      c.model.mode = stream_mode_from_string(s.at("mode").get<std::string>());
    }
    if (s.contains("activation")) {
      c.model.activation = activation_from_string(s.at("activation"));
    }
    maybe(s, "leaky_slope", c.model.leaky_slope);
    maybe(s, "lr", c.model.lr);
    maybe(s, "dropout", c.model.dropout);
    maybe(s, "max_epochs", c.model.max_epochs);
    maybe(s, "patience", c.model.patience);
  }
  if (j.contains("run")) {
    const json& s = j.at("run");
    maybe(s, "out_dir", c.out_dir);
    maybe(s, "seed", c.seed);
    maybe(s, "threads", c.threads);
    maybe(s, "label_ratio", c.label_ratio);
    maybe(s, "val_fraction", c.val_fraction);
  }
  return c;
}

struct Preset {
  const char* name;
  int streams;
  int overlap;
  Pooling pooling;
};

constexpr Preset kPresets[] = {
    {"20ng", 30, 15, Pooling::kAvg},   {"r8", 20, 10, Pooling::kAvg},
    {"r52", 25, 15, Pooling::kMax},    {"ohsumed", 30, 5, Pooling::kAvg},
    {"mr", 10, 5, Pooling::kMax},      {"agnews", 20, 5, Pooling::kAvg},
    {"twit", 25, 3, Pooling::kMax},    {"waimai", 30, 3, Pooling::kMax},
};

const Preset* find_preset(const std::string& dataset_name) {
  std::string key = lower(dataset_name);
  for (const Preset& p : kPresets) {
    if (key == p.name) return &p;
  }
  return nullptr;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (embed.dim != model.streams) {
    throw Error(ErrorCode::kInvalidConfig,
                "embed.dim and model.streams must agree (both are the edge dimension T)");
  }
  if (embed.dim < 1) throw Error(ErrorCode::kInvalidConfig, "embed.dim must be >= 1");
  if (embed.window < 1) throw Error(ErrorCode::kInvalidConfig, "embed.window must be >= 1");
  if (embed.epochs < 1) throw Error(ErrorCode::kInvalidConfig, "embed.epochs must be >= 1");
  if (embed.negatives < 0) throw Error(ErrorCode::kInvalidConfig, "embed.negatives must be >= 0");
  if (min_count < 0) throw Error(ErrorCode::kInvalidConfig, "corpus.min_count must be >= 0");
  if (graph.doc_overlap_threshold < 1) {
    throw Error(ErrorCode::kInvalidConfig, "graph.overlap_threshold must be >= 1");
  }
  if (!(label_ratio > 0.0 && label_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "run.label_ratio must be in (0, 1]");
  }
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "run.val_fraction must be in [0, 1)");
  }
  if (threads < 1) throw Error(ErrorCode::kInvalidConfig, "run.threads must be >= 1");
  std::string fmt = dataset_format;
  if (fmt != "auto" && fmt != "dir" && fmt != "tsv" && fmt != "synthetic") {
    throw Error(ErrorCode::kInvalidConfig, "unknown dataset format '" + fmt + "'");
  }
  if (fmt != "synthetic" && dataset_path.empty() && dataset_name != "synthetic") {
    throw Error(ErrorCode::kInvalidConfig, "corpus.path required for non-synthetic datasets");
  }
  model.validate();
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig c = *this;
  c.embed.seed = Rng::derive(seed, 0x454D4244u);
  c.model.seed = Rng::derive(seed, 0x4D4F444Cu);
  c.synthetic.seed = Rng::derive(seed, 0x53594E54u);
  c.model.threads = threads;
  return c;
}

std::string ExperimentConfig::canonical_json() const {
  json j = config_to_json(*this);
  // Where the artifacts land and how many workers ran are not part of the
  // experiment's identity: results are bit-identical across both.
  j["run"].erase("out_dir");
  j["run"].erase("threads");
  return j.dump();
}

std::string ExperimentConfig::fingerprint() const {
  std::uint64_t h = fnv1a64(canonical_json());
  if (dataset_format != "synthetic" && !dataset_path.empty()) {
    std::ifstream in(dataset_path, std::ios::binary);
    if (in) {
      std::ostringstream bytes;
      bytes << in.rdbuf();
      h = fnv1a64(bytes.str(), h);
    }
  }
  return to_hex(h);
}

ExperimentConfig default_experiment_config() { return ExperimentConfig{}; }

bool has_preset(const std::string& dataset_name) {
  return find_preset(dataset_name) != nullptr;
}

ExperimentConfig preset_for(const std::string& dataset_name) {
  ExperimentConfig c = default_experiment_config();
  c.dataset_name = dataset_name;
  if (const Preset* p = find_preset(dataset_name)) {
    c.embed.dim = p->streams;
    c.model.streams = p->streams;
    c.graph.doc_overlap_threshold = p->overlap;
    c.model.pooling = p->pooling;
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config parse: ") + e.what());
  }
  return config_from_json(j);
}

void save_experiment_config(const ExperimentConfig& config, const std::string& path) {
  atomic_write(path, config_to_json(config).dump(2) + "\n");
}

std::string default_config_text() {
  return config_to_json(default_experiment_config()).dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string to_string(TokenizerMode mode) {
  return mode == TokenizerMode::kPretokenized ? "pretokenized" : "english";
}

TokenizerMode tokenizer_from_string(const std::string& name) {
  if (name == "english") return TokenizerMode::kEnglish;
  if (name == "pretokenized") return TokenizerMode::kPretokenized;
  throw Error(ErrorCode::kInvalidConfig, "unknown tokenizer '" + name + "'");
}

std::string to_string(TfidfVariant variant) {
  return variant == TfidfVariant::kSmooth ? "smooth" : "raw";
}

TfidfVariant tfidf_variant_from_string(const std::string& name) {
  if (name == "raw") return TfidfVariant::kRaw;
  if (name == "smooth") return TfidfVariant::kSmooth;
  throw Error(ErrorCode::kInvalidConfig, "unknown tfidf variant '" + name + "'");
}

}  // namespace msgcn
