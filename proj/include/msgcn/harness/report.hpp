#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace msgcn {

struct SplitMetrics {
  int correct = 0;
  int total = 0;
  double accuracy = 0.0;
};

struct RunReport {
  std::string fingerprint;
  std::string dataset;
  int num_classes = 0;
  std::size_t parameter_count = 0;

  SplitMetrics train;
  SplitMetrics val;
  SplitMetrics test;

  // Test-split confusion: rows are expected classes, columns predicted.
  std::vector<std::vector<long>> confusion;
  std::vector<double> precision;
  std::vector<double> recall;

  int epochs_run = 0;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  std::string stopping_reason;

  // Filled by the pipeline; excluded from the JSON artifact so reruns with
  // the same config and seed are byte-identical.
  std::vector<std::pair<std::string, double>> stage_seconds;

  std::string note;
};

SplitMetrics split_metrics(const std::vector<int>& expected, const std::vector<int>& predicted);

std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& expected,
                                                const std::vector<int>& predicted,
                                                int num_classes);

// Precision and recall per class; classes absent from both axes get 0.
void precision_recall(const std::vector<std::vector<long>>& confusion,
                      std::vector<double>& precision, std::vector<double>& recall);

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);
std::string report_to_text(const RunReport& report, const std::vector<std::string>& class_names);

void save_report(const RunReport& report, const std::vector<std::string>& class_names,
                 const std::string& json_path, const std::string& text_path);

}  // namespace msgcn
