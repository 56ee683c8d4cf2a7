#pragma once

#include <cstdint>
#include <string>

#include "msgcn/corpus/corpus.hpp"
#include "msgcn/embed/cbow.hpp"
#include "msgcn/graph/build.hpp"
#include "msgcn/model/network.hpp"

namespace msgcn {

// One experiment end to end. The JSON layout mirrors the struct: sections
// "corpus", "embed", "graph", "model", "run". The master seed in [run]
// derives per-stage sub-seeds; the seed fields inside embed/model/synthetic
// are filled by resolved() and ignored on input.
struct ExperimentConfig {
  // [corpus]
  std::string dataset_path;
  std::string dataset_format = "auto";  // auto | dir | tsv | synthetic
  std::string dataset_name = "synthetic";
  int min_count = 5;
  TokenizerMode tokenizer = TokenizerMode::kEnglish;
  SyntheticOptions synthetic;

  // [embed]
  CbowOptions embed;

  // [graph]
  GraphOptions graph;

  // [model]
  TrainConfig model;

  // [run]
  std::string out_dir = "runs/default";
  std::uint64_t seed = 7;
  int threads = 1;
  double label_ratio = 0.01;
  double val_fraction = 0.10;

  // Checks cross-section consistency, most importantly that the embedding
  // width, graph edge dimension, and stream count agree.
  void validate() const;

  // Copy with sub-seeds and thread counts pushed into the stage options.
  ExperimentConfig resolved() const;

  // Hex hash over the canonical JSON dump plus the dataset bytes.
  std::string fingerprint() const;

  std::string canonical_json() const;
};

ExperimentConfig default_experiment_config();

// Known dataset names carry tuned (streams, overlap threshold, pooling);
// anything else keeps the defaults.
ExperimentConfig preset_for(const std::string& dataset_name);
bool has_preset(const std::string& dataset_name);

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& config, const std::string& path);

// The default configuration with every field spelled out.
std::string default_config_text();

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t basis = 1469598103934665603ULL);
std::string to_hex(std::uint64_t value);

std::string to_string(TokenizerMode mode);
TokenizerMode tokenizer_from_string(const std::string& name);
std::string to_string(TfidfVariant variant);
TfidfVariant tfidf_variant_from_string(const std::string& name);

}  // namespace msgcn
