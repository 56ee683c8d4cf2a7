#include "msgcn/harness/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "msgcn/core/error.hpp"
#include "msgcn/core/io.hpp"
#include "msgcn/harness/pipeline.hpp"
#include "msgcn/model/train.hpp"

namespace msgcn {

std::vector<SweepEntry> sweep(const ExperimentConfig& base, const SweepGrid& grid) {
  if (grid.streams.empty() || grid.overlap.empty() || grid.pooling.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "sweep grid must list at least one value per axis");
  }
  if (grid.repeats < 1) {
    throw Error(ErrorCode::kInvalidConfig, "sweep repeats must be >= 1");
  }
  std::vector<SweepEntry> entries;
  for (int t : grid.streams) {
    for (int u : grid.overlap) {
      for (Pooling pooling : grid.pooling) {
        SweepEntry entry;
        entry.streams = t;
        entry.overlap = u;
        entry.pooling = pooling;
        for (int r = 0; r < grid.repeats; ++r) {
          ExperimentConfig config = base;
          config.embed.dim = t;
          config.model.streams = t;
          config.graph.doc_overlap_threshold = u;
          config.model.pooling = pooling;
          config.seed = base.seed + static_cast<std::uint64_t>(r);
          InMemoryRun run = run_in_memory(config);
          // The monitored accuracy at the best epoch, the quantity the
          // stopping rule optimizes.
          int best = run.checkpoint.history.best_epoch;
          double val_acc = best >= 1 ? run.checkpoint.history.val_accuracy[best - 1] : 0.0;
          entry.val_accuracy.push_back(val_acc);
          entry.test_accuracy.push_back(run.report.test.accuracy);
          entry.parameter_count = run.checkpoint.params.parameter_count();
        }
        double val_total = 0.0;
        double test_total = 0.0;
        double best_test = 0.0;
        for (std::size_t i = 0; i < entry.val_accuracy.size(); ++i) {
          val_total += entry.val_accuracy[i];
          test_total += entry.test_accuracy[i];
          best_test = std::max(best_test, entry.test_accuracy[i]);
        }
        entry.mean_val_accuracy = val_total / entry.val_accuracy.size();
        entry.mean_test_accuracy = test_total / entry.test_accuracy.size();
        entry.best_test_accuracy = best_test;
        entries.push_back(std::move(entry));
      }
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const SweepEntry& a, const SweepEntry& b) {
    if (a.mean_val_accuracy != b.mean_val_accuracy) {
      return a.mean_val_accuracy > b.mean_val_accuracy;
    }
    return a.parameter_count < b.parameter_count;
  });
  return entries;
}

std::string sweep_table(const std::vector<SweepEntry>& entries) {
  std::ostringstream out;
  out << "rank  T   u  pooling  mean_val  mean_test  best_test  params\n";
  char buf[160];
  int rank = 1;
  for (const SweepEntry& e : entries) {
    std::snprintf(buf, sizeof(buf), "%4d %3d %3d  %-7s %9.4f %10.4f %10.4f  %zu\n", rank++,
                  e.streams, e.overlap, to_string(e.pooling).c_str(), e.mean_val_accuracy,
                  e.mean_test_accuracy, e.best_test_accuracy, e.parameter_count);
    out << buf;
  }
  return out.str();
}

void save_sweep(const std::vector<SweepEntry>& entries, const std::string& json_path,
                const std::string& text_path) {
  nlohmann::json j = nlohmann::json::array();
  for (const SweepEntry& e : entries) {
    j.push_back({{"streams", e.streams},
                 {"overlap", e.overlap},
                 {"pooling", to_string(e.pooling)},
                 {"parameter_count", e.parameter_count},
                 {"val_accuracy", e.val_accuracy},
                 {"test_accuracy", e.test_accuracy},
                 {"mean_val_accuracy", e.mean_val_accuracy},
                 {"mean_test_accuracy", e.mean_test_accuracy},
                 {"best_test_accuracy", e.best_test_accuracy}});
  }
  atomic_write(json_path, j.dump(2) + "\n");
  atomic_write(text_path, sweep_table(entries));
}

}  // namespace msgcn
