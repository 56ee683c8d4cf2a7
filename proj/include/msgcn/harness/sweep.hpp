#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "msgcn/harness/config.hpp"
#include "msgcn/model/network.hpp"

namespace msgcn {

struct SweepGrid {
  std::vector<int> streams;        // T values
  std::vector<int> overlap;        // doc-doc overlap thresholds u
  std::vector<Pooling> pooling;
  int repeats = 5;
};

struct SweepEntry {
  int streams = 0;
  int overlap = 0;
  Pooling pooling = Pooling::kMax;
  std::size_t parameter_count = 0;
  std::vector<double> val_accuracy;   // one per repeat, seeds base..base+r-1
  std::vector<double> test_accuracy;
  double mean_val_accuracy = 0.0;
  double mean_test_accuracy = 0.0;
  double best_test_accuracy = 0.0;
};

// Runs every grid combination `repeats` times with seeds base..base+repeats-1
// and returns entries ranked by mean validation accuracy, descending, ties
// broken by fewer parameters.
std::vector<SweepEntry> sweep(const ExperimentConfig& base, const SweepGrid& grid);

std::string sweep_table(const std::vector<SweepEntry>& entries);
void save_sweep(const std::vector<SweepEntry>& entries, const std::string& json_path,
                const std::string& text_path);

}  // namespace msgcn
