#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msgcn/core/error.hpp"
#include "msgcn/core/io.hpp"
#include "msgcn/harness/baseline.hpp"
#include "msgcn/harness/config.hpp"
#include "msgcn/harness/export.hpp"
#include "msgcn/harness/pipeline.hpp"
#include "msgcn/harness/sweep.hpp"
#include "msgcn/model/train.hpp"

namespace {

namespace fs = std::filesystem;
using namespace msgcn;

struct GlobalArgs {
  std::string config_path;
  std::string dataset;
  std::string out_dir;
  bool have_seed = false;
  std::uint64_t seed = 0;
  int threads = 0;
};

ExperimentConfig effective_config(const GlobalArgs& args) {
  ExperimentConfig config;
  if (!args.config_path.empty()) {
    config = load_experiment_config(args.config_path);
  } else if (!args.dataset.empty()) {
    config = preset_for(args.dataset);
  } else {
    config = default_experiment_config();
  }
  if (!args.dataset.empty() && args.config_path.empty()) config.dataset_name = args.dataset;
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.have_seed) config.seed = args.seed;
  if (args.threads > 0) config.threads = args.threads;
  return config;
}

void write_default_config(const std::string& out_dir) {
  atomic_write((fs::path(out_dir) / "config.default").string(), default_config_text());
}

void print_report(const RunReport& report, const std::vector<std::string>& class_names) {
  std::fputs(report_to_text(report, class_names).c_str(), stdout);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Multi-dimensional edge graph text classification pipeline"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "Experiment config JSON");
  app.add_option("--dataset", args.dataset, "Dataset preset name (e.g. r8, 20ng, synthetic)");
  app.add_option("--out", args.out_dir, "Output directory for artifacts");
  auto* seed_opt = app.add_option("--seed", args.seed, "Master seed");
  app.add_option("--threads", args.threads, "Worker threads for stream computations");

  auto* cmd_prepare = app.add_subcommand(
      "prepare", "Build the corpus and splits; also writes config.default");
  auto* cmd_embed = app.add_subcommand("embed", "Train word and document embeddings");
  auto* cmd_graph = app.add_subcommand("graph", "Assemble the multi-edge graph");
  auto* cmd_train = app.add_subcommand("train", "Train the classifier to a checkpoint");
  auto* cmd_evaluate =
      app.add_subcommand("evaluate", "Run the full pipeline and write the report");
  auto* cmd_baseline = app.add_subcommand("baseline", "TF-IDF + logistic regression floor");
  auto* cmd_sweep = app.add_subcommand("sweep", "Grid search over T, u, pooling");
  auto* cmd_export = app.add_subcommand("export", "Dump per-document vectors as TSV");
  auto* cmd_stats = app.add_subcommand("stats", "Print graph statistics");

  std::vector<int> sweep_streams{5, 10, 15, 20, 25, 30};
  std::vector<int> sweep_overlap{3, 5, 10, 15};
  std::vector<std::string> sweep_pooling{"max", "avg", "min"};
  int sweep_repeats = 5;
  cmd_sweep->add_option("--streams", sweep_streams, "T values to scan");
  cmd_sweep->add_option("--overlap", sweep_overlap, "Overlap thresholds to scan");
  cmd_sweep->add_option("--pooling", sweep_pooling, "Pooling methods to scan");
  cmd_sweep->add_option("--repeats", sweep_repeats, "Runs per combination");

  std::string export_layer = "hidden";
  std::string export_dest;
  cmd_export->add_option("--layer", export_layer, "input, hidden, or output");
  cmd_export->add_option("--dest", export_dest, "Destination TSV path");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  args.have_seed = seed_opt->count() > 0;

  ExperimentConfig config = effective_config(args);
  config.validate();
  Pipeline pipeline(config);

  if (cmd_prepare->parsed()) {
    const Corpus& corpus = pipeline.prepare();
    write_default_config(config.out_dir);
    std::printf("corpus: %d docs, %d words, %d classes; splits %zu/%zu/%zu\n",
                corpus.num_docs(), corpus.num_words(), corpus.num_classes(),
                corpus.splits.train_ids.size(), corpus.splits.val_ids.size(),
                corpus.splits.test_ids.size());
  } else if (cmd_embed->parsed()) {
    const auto& emb = pipeline.embeddings();
    std::printf("embeddings: %d word rows, %d doc rows, dim %d\n", emb.first.rows(),
                emb.second.rows(), emb.first.cols());
  } else if (cmd_graph->parsed()) {
    const MultiEdgeGraph& graph = pipeline.graph();
    std::printf("graph: %d nodes (%d words + %d docs), %d edge dimensions\n",
                graph.n_nodes(), graph.n_words, graph.n_docs, graph.dims);
  } else if (cmd_train->parsed()) {
    const Checkpoint& ckpt = pipeline.train();
    std::printf("trained %d epochs (best %d, %s), best monitored loss %.6f\n",
                ckpt.history.epochs_run, ckpt.history.best_epoch,
                ckpt.history.stopping_reason.c_str(), ckpt.history.best_val_loss);
  } else if (cmd_evaluate->parsed()) {
    RunReport report = pipeline.evaluate();
    print_report(report, pipeline.prepare().class_names);
  } else if (cmd_baseline->parsed()) {
    const Corpus& corpus = pipeline.prepare();
    RunReport report = baseline_tfidf_lr(corpus, corpus.splits);
    report.fingerprint = config.fingerprint();
    report.dataset = config.dataset_name;
    save_report(report, corpus.class_names,
                (fs::path(config.out_dir) / "baseline_report.json").string(),
                (fs::path(config.out_dir) / "baseline_report.txt").string());
    print_report(report, corpus.class_names);
  } else if (cmd_sweep->parsed()) {
    SweepGrid grid;
    grid.streams = sweep_streams;
    grid.overlap = sweep_overlap;
    for (const std::string& p : sweep_pooling) grid.pooling.push_back(pooling_from_string(p));
    grid.repeats = sweep_repeats;
    std::vector<SweepEntry> entries = sweep(config, grid);
    save_sweep(entries, (fs::path(config.out_dir) / "sweep.json").string(),
               (fs::path(config.out_dir) / "sweep.txt").string());
    std::fputs(sweep_table(entries).c_str(), stdout);
  } else if (cmd_export->parsed()) {
    const Corpus& corpus = pipeline.prepare();
    const MultiEdgeGraph& graph = pipeline.graph();
    const Checkpoint& ckpt = pipeline.train();
    ExportLayer layer = export_layer_from_string(export_layer);
    std::string dest = export_dest.empty()
                           ? (fs::path(config.out_dir) / ("embeddings_" + export_layer + ".tsv"))
                                 .string()
                           : export_dest;
    export_embeddings(ckpt, graph, corpus, layer, dest);
    std::printf("wrote %s\n", dest.c_str());
  } else if (cmd_stats->parsed()) {
    const MultiEdgeGraph& graph = pipeline.graph();
    GraphStats stats = graph_stats(graph);
    std::printf("nodes %d  edge dims %d  nnz per dim %zu\n", graph.n_nodes(), graph.dims,
                stats.nnz_per_dim);
    std::printf("degree histogram (power-of-two buckets):");
    for (std::size_t b = 0; b < stats.degree_histogram.size(); ++b) {
      std::printf(" %zu", stats.degree_histogram[b]);
    }
    std::printf("\n");
    for (std::size_t t = 0; t < stats.weight_quantiles.size(); ++t) {
      const auto& q = stats.weight_quantiles[t];
      std::printf("dim %zu weights: min %.6f q25 %.6f median %.6f q75 %.6f max %.6f\n", t,
                  q[0], q[1], q[2], q[3], q[4]);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
