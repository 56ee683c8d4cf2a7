#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msgcn/core/io.hpp"
#include "msgcn/core/matrix.hpp"
#include "msgcn/corpus/corpus.hpp"
#include "msgcn/graph/build.hpp"
#include "msgcn/harness/config.hpp"
#include "msgcn/harness/report.hpp"
#include "msgcn/model/train.hpp"

namespace msgcn {

// Stage computations shared by the disk-backed pipeline and the in-memory
// sweep runner. Each takes the resolved configuration.
Corpus make_corpus(const ExperimentConfig& resolved);
std::pair<Matrix, Matrix> make_embeddings(const ExperimentConfig& resolved, const Corpus& corpus);
MultiEdgeGraph make_graph(const ExperimentConfig& resolved, const Corpus& corpus,
                          const Matrix& word_embeddings, const Matrix& doc_embeddings);
TrainResult make_training(const ExperimentConfig& resolved, const Corpus& corpus,
                          const MultiEdgeGraph& graph);
RunReport make_run_report(const ExperimentConfig& config, const Corpus& corpus,
                          const MultiEdgeGraph& graph, const Checkpoint& checkpoint);

// Disk-backed pipeline with per-stage caching. Every stage writes its
// artifact plus a fingerprint sidecar into the output directory; a stage
// whose artifact and fingerprint both match is loaded instead of recomputed.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config);

  const Corpus& prepare();
  const std::pair<Matrix, Matrix>& embeddings();
  const MultiEdgeGraph& graph();
  const Checkpoint& train();
  RunReport evaluate();

  const ExperimentConfig& config() const { return config_; }
  const std::string& out_dir() const { return config_.out_dir; }

  std::string corpus_fingerprint() const;
  std::string embed_fingerprint() const;
  std::string graph_fingerprint() const;
  std::string model_fingerprint() const;

 private:
  bool stage_cached(const std::string& artifact, const std::string& fingerprint) const;
  void commit_stage(const std::string& artifact_name, const std::string& fingerprint);
  std::string path_of(const std::string& name) const;
  void record_time(const std::string& stage, double seconds);

  ExperimentConfig config_;    // as given
  ExperimentConfig resolved_;  // sub-seeds filled
  std::optional<Corpus> corpus_;
  std::optional<std::pair<Matrix, Matrix>> embeddings_;
  std::optional<MultiEdgeGraph> graph_;
  std::optional<Checkpoint> checkpoint_;
  std::vector<std::pair<std::string, double>> stage_seconds_;
};

// Runs every stage, persists all artifacts and the report, returns the report.
RunReport run_pipeline(const ExperimentConfig& config);

// Full run without touching the filesystem; used by sweeps and tests.
struct InMemoryRun {
  RunReport report;
  Corpus corpus;
  MultiEdgeGraph graph;
  Checkpoint checkpoint;
};
InMemoryRun run_in_memory(const ExperimentConfig& config);

}  // namespace msgcn
