#include "msgcn/harness/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msgcn/core/error.hpp"
#include "msgcn/core/io.hpp"

namespace msgcn {

SplitMetrics split_metrics(const std::vector<int>& expected, const std::vector<int>& predicted) {
  if (expected.size() != predicted.size()) {
    throw Error(ErrorCode::kShapeMismatch, "metric vectors differ in length");
  }
  SplitMetrics m;
  m.total = static_cast<int>(expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] == predicted[i]) m.correct += 1;
  }
  m.accuracy = m.total == 0 ? 0.0 : static_cast<double>(m.correct) / m.total;
  return m;
}

std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& expected,
                                                const std::vector<int>& predicted,
                                                int num_classes) {
  if (expected.size() != predicted.size()) {
    throw Error(ErrorCode::kShapeMismatch, "confusion inputs differ in length");
  }
  std::vector<std::vector<long>> cm(num_classes, std::vector<long>(num_classes, 0));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    int e = expected[i];
    int p = predicted[i];
    if (e < 0 || e >= num_classes || p < 0 || p >= num_classes) {
      throw Error(ErrorCode::kShapeMismatch, "class id out of range in confusion matrix");
    }
    cm[e][p] += 1;
  }
  return cm;
}

void precision_recall(const std::vector<std::vector<long>>& confusion,
                      std::vector<double>& precision, std::vector<double>& recall) {
  int c = static_cast<int>(confusion.size());
  precision.assign(c, 0.0);
  recall.assign(c, 0.0);
  for (int k = 0; k < c; ++k) {
    long tp = confusion[k][k];
    long col = 0;
    long row = 0;
    for (int i = 0; i < c; ++i) {
      col += confusion[i][k];
      row += confusion[k][i];
    }
    precision[k] = col == 0 ? 0.0 : static_cast<double>(tp) / col;
    recall[k] = row == 0 ? 0.0 : static_cast<double>(tp) / row;
  }
}

std::string report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["fingerprint"] = r.fingerprint;
  j["dataset"] = r.dataset;
  j["num_classes"] = r.num_classes;
  j["parameter_count"] = r.parameter_count;
  auto split = [](const SplitMetrics& m) {
    return nlohmann::json{{"correct", m.correct}, {"total", m.total}, {"accuracy", m.accuracy}};
  };
  j["train"] = split(r.train);
  j["val"] = split(r.val);
  j["test"] = split(r.test);
  j["confusion"] = r.confusion;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["epochs_run"] = r.epochs_run;
  j["best_epoch"] = r.best_epoch;
  j["best_val_loss"] = r.best_val_loss;
  j["stopping_reason"] = r.stopping_reason;
  j["note"] = r.note;
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunReport r;
  r.fingerprint = j.at("fingerprint").get<std::string>();
  r.dataset = j.at("dataset").get<std::string>();
  r.num_classes = j.at("num_classes").get<int>();
  r.parameter_count = j.at("parameter_count").get<std::size_t>();
  auto split = [&](const char* key) {
    SplitMetrics m;
    m.correct = j.at(key).at("correct").get<int>();
    m.total = j.at(key).at("total").get<int>();
    m.accuracy = j.at(key).at("accuracy").get<double>();
    return m;
  };
  r.train = split("train");
  r.val = split("val");
  r.test = split("test");
  r.confusion = j.at("confusion").get<std::vector<std::vector<long>>>();
  r.precision = j.at("precision").get<std::vector<double>>();
  r.recall = j.at("recall").get<std::vector<double>>();
  r.epochs_run = j.at("epochs_run").get<int>();
  r.best_epoch = j.at("best_epoch").get<int>();
  r.best_val_loss = j.at("best_val_loss").get<double>();
  r.stopping_reason = j.at("stopping_reason").get<std::string>();
  r.note = j.at("note").get<std::string>();
  return r;
}

std::string report_to_text(const RunReport& r, const std::vector<std::string>& class_names) {
  std::ostringstream out;
  char buf[160];
  out << "run " << r.fingerprint << "  dataset " << r.dataset << "\n";
  if (!r.note.empty()) out << r.note << "\n";
  std::snprintf(buf, sizeof(buf), "parameters %zu  epochs %d  best epoch %d (%s)\n",
                r.parameter_count, r.epochs_run, r.best_epoch, r.stopping_reason.c_str());
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "accuracy  train %.4f (%d/%d)  val %.4f (%d/%d)  test %.4f (%d/%d)\n",
                r.train.accuracy, r.train.correct, r.train.total, r.val.accuracy,
                r.val.correct, r.val.total, r.test.accuracy, r.test.correct, r.test.total);
  out << buf;
  out << "class              precision  recall\n";
  for (int c = 0; c < r.num_classes; ++c) {
    std::string name = c < static_cast<int>(class_names.size()) ? class_names[c]
                                                                : "class" + std::to_string(c);
    if (name.size() > 18) name = name.substr(0, 18);
    std::snprintf(buf, sizeof(buf), "%-18s %9.4f %7.4f\n", name.c_str(),
                  c < static_cast<int>(r.precision.size()) ? r.precision[c] : 0.0,
                  c < static_cast<int>(r.recall.size()) ? r.recall[c] : 0.0);
    out << buf;
  }
  out << "confusion (rows expected, cols predicted)\n";
  for (const auto& row : r.confusion) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s%6ld", i == 0 ? "" : " ", row[i]);
      out << buf;
    }
    out << "\n";
  }
  if (!r.stage_seconds.empty()) {
    out << "stage timings\n";
    for (const auto& [stage, seconds] : r.stage_seconds) {
      std::snprintf(buf, sizeof(buf), "  %-10s %8.3f s\n", stage.c_str(), seconds);
      out << buf;
    }
  }
  return out.str();
}

void save_report(const RunReport& report, const std::vector<std::string>& class_names,
                 const std::string& json_path, const std::string& text_path) {
  atomic_write(json_path, report_to_json(report));
  atomic_write(text_path, report_to_text(report, class_names));
}

}  // namespace msgcn
