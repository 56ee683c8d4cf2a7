#include "msgcn/harness/export.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "msgcn/core/error.hpp"
#include "msgcn/core/io.hpp"
#include "msgcn/model/network.hpp"

namespace msgcn {

ExportLayer export_layer_from_string(const std::string& name) {
  if (name == "input") return ExportLayer::kInput;
  if (name == "hidden") return ExportLayer::kHidden;
  if (name == "output") return ExportLayer::kOutput;
  throw Error(ErrorCode::kInvalidConfig, "unknown export layer '" + name + "'");
}

std::string to_string(ExportLayer layer) {
  switch (layer) {
    case ExportLayer::kInput: return "input";
    case ExportLayer::kHidden: return "hidden";
    case ExportLayer::kOutput: return "output";
  }
  return "input";
}

void export_embeddings(const Checkpoint& checkpoint, const MultiEdgeGraph& graph,
                       const Corpus& corpus, ExportLayer layer, const std::string& path) {
  Matrix features;
  switch (layer) {
    case ExportLayer::kInput:
      features = graph.node_features;
      break;
    case ExportLayer::kHidden: {
      Network net(graph, checkpoint.config, checkpoint.num_classes);
      features = net.forward_hidden(checkpoint.params);
      break;
    }
    case ExportLayer::kOutput: {
      Network net(graph, checkpoint.config, checkpoint.num_classes);
      features = net.forward(checkpoint.params);
      break;
    }
  }
  std::ostringstream out;
  out << "#layer=" << to_string(layer) << " dim=" << features.cols() << '\n';
  out.precision(17);
  for (const Document& doc : corpus.docs) {
    int node = graph.doc_node(doc.id);
    out << doc.id << '\t' << doc.label;
    const double* row = features.row(node);
    for (int c = 0; c < features.cols(); ++c) out << '\t' << row[c];
    out << '\n';
  }
  atomic_write(path, out.str());
}

Matrix load_exported(const std::string& path, std::vector<int>& doc_ids,
                     std::vector<int>& labels) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#layer=", 0) != 0) {
    throw Error(ErrorCode::kIo, "missing export header in " + path);
  }
  auto dim_pos = line.find("dim=");
  if (dim_pos == std::string::npos) throw Error(ErrorCode::kIo, "missing dim in header");
  int dim = std::stoi(line.substr(dim_pos + 4));

  doc_ids.clear();
  labels.clear();
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    int id = 0;
    int label = 0;
    fields >> id >> label;
    doc_ids.push_back(id);
    labels.push_back(label);
    for (int c = 0; c < dim; ++c) {
      double v = 0.0;
      if (!(fields >> v)) throw Error(ErrorCode::kIo, "truncated row in " + path);
      values.push_back(v);
    }
  }
  Matrix out(static_cast<int>(doc_ids.size()), dim);
  std::copy(values.begin(), values.end(), out.data().begin());
  return out;
}

}  // namespace msgcn
