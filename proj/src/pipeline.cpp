#include "msgcn/harness/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

#include "msgcn/core/error.hpp"
#include "msgcn/core/io.hpp"
#include "msgcn/core/rng.hpp"

namespace msgcn {
namespace {

namespace fs = std::filesystem;

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto run_stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  }
}

std::vector<int> labels_of(const Corpus& corpus, const std::vector<int>& doc_ids) {
  std::vector<int> out;
  out.reserve(doc_ids.size());
  for (int id : doc_ids) out.push_back(corpus.docs[id].label);
  return out;
}

}  // namespace

Corpus make_corpus(const ExperimentConfig& resolved) {
  Corpus corpus;
  bool synthetic = resolved.dataset_format == "synthetic" ||
                   (resolved.dataset_format == "auto" && resolved.dataset_path.empty());
  if (synthetic) {
    corpus = generate_synthetic(resolved.synthetic);
  } else {
    CorpusOptions options;
    options.tokenizer = resolved.tokenizer;
    options.min_count = resolved.min_count;
    options.quiet = true;
    corpus = load_dataset(resolved.dataset_path, options);
  }
  SplitOptions split_options;
  split_options.label_ratio = resolved.label_ratio;
  split_options.val_fraction = resolved.val_fraction;
  split_options.seed = Rng::derive(resolved.seed, 0x53504C54u);
  corpus.splits = make_splits(corpus, split_options);
  return corpus;
}

std::pair<Matrix, Matrix> make_embeddings(const ExperimentConfig& resolved,
                                          const Corpus& corpus) {
  Matrix words = train_word2vec(corpus, resolved.embed);
  Matrix docs = train_doc2vec(corpus, resolved.embed);
  return {std::move(words), std::move(docs)};
}

MultiEdgeGraph make_graph(const ExperimentConfig& resolved, const Corpus& corpus,
                          const Matrix& word_embeddings, const Matrix& doc_embeddings) {
  return build_graph(corpus, word_embeddings, doc_embeddings, resolved.graph);
}

TrainResult make_training(const ExperimentConfig& resolved, const Corpus& corpus,
                          const MultiEdgeGraph& graph) {
  std::vector<int> doc_labels;
  doc_labels.reserve(corpus.docs.size());
  for (const Document& d : corpus.docs) doc_labels.push_back(d.label);
  return train_model(graph, corpus.splits, doc_labels, corpus.num_classes(),
                     resolved.model);
}

RunReport make_run_report(const ExperimentConfig& config, const Corpus& corpus,
                          const MultiEdgeGraph& graph, const Checkpoint& checkpoint) {
  RunReport report;
  report.fingerprint = config.fingerprint();
  report.dataset = config.dataset_name;
  report.num_classes = checkpoint.num_classes;
  report.parameter_count = checkpoint.params.parameter_count();
  report.epochs_run = checkpoint.history.epochs_run;
  report.best_epoch = checkpoint.history.best_epoch;
  report.best_val_loss = checkpoint.history.best_val_loss;
  report.stopping_reason = checkpoint.history.stopping_reason;

  auto evaluate_split = [&](const std::vector<int>& doc_ids) {
    std::vector<int> nodes;
    nodes.reserve(doc_ids.size());
    for (int id : doc_ids) nodes.push_back(graph.doc_node(id));
    Prediction pred = predict(graph, checkpoint.params, checkpoint.config,
                              checkpoint.num_classes, nodes);
    return pred.classes;
  };

  const SplitAssignment& s = corpus.splits;
  if (!s.train_ids.empty()) {
    report.train = split_metrics(labels_of(corpus, s.train_ids), evaluate_split(s.train_ids));
  }
  if (!s.val_ids.empty()) {
    report.val = split_metrics(labels_of(corpus, s.val_ids), evaluate_split(s.val_ids));
  }
  if (!s.test_ids.empty()) {
    std::vector<int> expected = labels_of(corpus, s.test_ids);
    std::vector<int> predicted = evaluate_split(s.test_ids);
    report.test = split_metrics(expected, predicted);
    report.confusion = confusion_matrix(expected, predicted, checkpoint.num_classes);
    precision_recall(report.confusion, report.precision, report.recall);
  } else {
    report.confusion.assign(checkpoint.num_classes,
                            std::vector<long>(checkpoint.num_classes, 0));
    report.precision.assign(checkpoint.num_classes, 0.0);
    report.recall.assign(checkpoint.num_classes, 0.0);
  }
  return report;
}

Pipeline::Pipeline(ExperimentConfig config)
    : config_(std::move(config)), resolved_(config_.resolved()) {
  config_.validate();
}

std::string Pipeline::path_of(const std::string& name) const {
  return (fs::path(config_.out_dir) / name).string();
}

bool Pipeline::stage_cached(const std::string& artifact, const std::string& fingerprint) const {
  std::string art_path = path_of(artifact);
  std::string fp_path = art_path + ".fp";
  if (!fs::exists(art_path) || !fs::exists(fp_path)) return false;
  return read_file(fp_path) == fingerprint;
}

void Pipeline::commit_stage(const std::string& artifact_name, const std::string& fingerprint) {
  atomic_write(path_of(artifact_name) + ".fp", fingerprint);
}

void Pipeline::record_time(const std::string& stage, double seconds) {
  for (auto& [name, value] : stage_seconds_) {
    if (name == stage) {
      value = seconds;
      return;
    }
  }
  stage_seconds_.emplace_back(stage, seconds);
}

std::string Pipeline::corpus_fingerprint() const {
  std::ostringstream key;
  key << "corpus|" << config_.dataset_path << "|" << config_.dataset_format << "|"
      << config_.dataset_name << "|" << config_.min_count << "|"
      << to_string(config_.tokenizer) << "|" << config_.synthetic.classes << "|"
      << config_.synthetic.docs_per_class << "|" << config_.synthetic.vocab_per_class << "|"
      << config_.synthetic.shared_vocab << "|" << config_.synthetic.doc_length << "|"
      << config_.synthetic.class_token_fraction << "|" << config_.label_ratio << "|"
      << config_.val_fraction << "|" << config_.seed;
  std::uint64_t h = fnv1a64(key.str());
  if (config_.dataset_format != "synthetic" && !config_.dataset_path.empty() &&
      fs::exists(config_.dataset_path) && fs::is_regular_file(config_.dataset_path)) {
    h = fnv1a64(read_file(config_.dataset_path), h);
  }
  return to_hex(h);
}

std::string Pipeline::embed_fingerprint() const {
  std::ostringstream key;
  key << "embed|" << corpus_fingerprint() << "|" << config_.embed.dim << "|"
      << config_.embed.window << "|" << config_.embed.epochs << "|"
      << config_.embed.negatives << "|" << config_.embed.lr_start << "|"
      << config_.embed.noise_exponent << "|" << config_.embed.average_context;
  return to_hex(fnv1a64(key.str()));
}

std::string Pipeline::graph_fingerprint() const {
  std::ostringstream key;
  key << "graph|" << embed_fingerprint() << "|" << config_.graph.cooccurrence_window << "|"
      << config_.graph.all_pairs << "|" << config_.graph.doc_overlap_threshold << "|"
      << to_string(config_.graph.tfidf_variant);
  return to_hex(fnv1a64(key.str()));
}

std::string Pipeline::model_fingerprint() const {
  std::ostringstream key;
  const TrainConfig& m = config_.model;
  key << "model|" << graph_fingerprint() << "|" << m.streams << "|" << m.hidden_width << "|"
      << m.hidden_layers << "|" << to_string(m.pooling) << "|" << to_string(m.mode) << "|"
      << to_string(m.activation) << "|" << m.leaky_slope << "|" << m.lr << "|" << m.dropout
      << "|" << m.max_epochs << "|" << m.patience;
  return to_hex(fnv1a64(key.str()));
}

const Corpus& Pipeline::prepare() {
  if (corpus_) return *corpus_;
  StageTimer timer;
  std::string fp = corpus_fingerprint();
  if (stage_cached("corpus.json", fp)) {
    corpus_ = run_stage("prepare", [&] { return load_corpus(path_of("corpus.json")); });
  } else {
    corpus_ = run_stage("prepare", [&] { return make_corpus(resolved_); });
    save_corpus(*corpus_, path_of("corpus.json"));
    commit_stage("corpus.json", fp);
  }
  record_time("prepare", timer.seconds());
  return *corpus_;
}

const std::pair<Matrix, Matrix>& Pipeline::embeddings() {
  if (embeddings_) return *embeddings_;
  const Corpus& corpus = prepare();
  StageTimer timer;
  std::string fp = embed_fingerprint();
  std::string word_path = path_of("embeddings_word.tsv");
  std::string doc_path = path_of("embeddings_doc.tsv");
  if (stage_cached("embeddings_word.tsv", fp) && stage_cached("embeddings_doc.tsv", fp)) {
    embeddings_ = run_stage("embed", [&] {
      return std::make_pair(
          load_embeddings(word_path, word_row_keys(corpus), config_.embed.dim),
          load_embeddings(doc_path, doc_row_keys(corpus), config_.embed.dim));
    });
  } else {
    embeddings_ = run_stage("embed", [&] { return make_embeddings(resolved_, corpus); });
    save_embeddings(word_path, word_row_keys(corpus), embeddings_->first);
    save_embeddings(doc_path, doc_row_keys(corpus), embeddings_->second);
    commit_stage("embeddings_word.tsv", fp);
    commit_stage("embeddings_doc.tsv", fp);
  }
  record_time("embed", timer.seconds());
  return *embeddings_;
}

const MultiEdgeGraph& Pipeline::graph() {
  if (graph_) return *graph_;
  const Corpus& corpus = prepare();
  const auto& emb = embeddings();
  StageTimer timer;
  std::string fp = graph_fingerprint();
  if (stage_cached("graph.json", fp)) {
    graph_ = run_stage("graph", [&] { return load_graph(path_of("graph.json")); });
  } else {
    graph_ = run_stage("graph", [&] {
      return make_graph(resolved_, corpus, emb.first, emb.second);
    });
    save_graph(*graph_, path_of("graph.json"));
    commit_stage("graph.json", fp);
  }
  record_time("graph", timer.seconds());
  return *graph_;
}

const Checkpoint& Pipeline::train() {
  if (checkpoint_) return *checkpoint_;
  const Corpus& corpus = prepare();
  const MultiEdgeGraph& g = graph();
  StageTimer timer;
  std::string fp = model_fingerprint();
  if (stage_cached("checkpoint.json", fp)) {
    checkpoint_ = run_stage("train", [&] { return load_checkpoint(path_of("checkpoint.json")); });
  } else {
    TrainResult result = run_stage("train", [&] { return make_training(resolved_, corpus, g); });
    Checkpoint ckpt;
    ckpt.config = resolved_.model;
    ckpt.num_classes = corpus.num_classes();
    ckpt.params = std::move(result.params);
    ckpt.adam = std::move(result.adam);
    ckpt.history = std::move(result.history);
    checkpoint_ = std::move(ckpt);
    save_checkpoint(*checkpoint_, path_of("checkpoint.json"));
    commit_stage("checkpoint.json", fp);
  }
  record_time("train", timer.seconds());
  return *checkpoint_;
}

RunReport Pipeline::evaluate() {
  const Corpus& corpus = prepare();
  const MultiEdgeGraph& g = graph();
  const Checkpoint& ckpt = train();
  StageTimer timer;
  RunReport report =
      run_stage("evaluate", [&] { return make_run_report(config_, corpus, g, ckpt); });
  record_time("evaluate", timer.seconds());
  report.stage_seconds = stage_seconds_;
  save_report(report, corpus.class_names, path_of("report.json"), path_of("report.txt"));
  return report;
}

RunReport run_pipeline(const ExperimentConfig& config) {
  Pipeline pipeline(config);
  return pipeline.evaluate();
}

InMemoryRun run_in_memory(const ExperimentConfig& config) {
  config.validate();
  ExperimentConfig resolved = config.resolved();
  InMemoryRun run;
  run.corpus = run_stage("prepare", [&] { return make_corpus(resolved); });
  auto embeddings =
      run_stage("embed", [&] { return make_embeddings(resolved, run.corpus); });
  run.graph = run_stage("graph", [&] {
    return make_graph(resolved, run.corpus, embeddings.first, embeddings.second);
  });
  TrainResult result =
      run_stage("train", [&] { return make_training(resolved, run.corpus, run.graph); });
  run.checkpoint.config = resolved.model;
  run.checkpoint.num_classes = run.corpus.num_classes();
  run.checkpoint.params = std::move(result.params);
  run.checkpoint.adam = std::move(result.adam);
  run.checkpoint.history = std::move(result.history);
  run.report = run_stage("evaluate", [&] {
    return make_run_report(config, run.corpus, run.graph, run.checkpoint);
  });
  return run;
}

}  // namespace msgcn
