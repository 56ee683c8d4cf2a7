#pragma once

#include <string>
#include <vector>

#include "msgcn/core/matrix.hpp"
#include "msgcn/corpus/corpus.hpp"
#include "msgcn/graph/build.hpp"
#include "msgcn/model/train.hpp"

namespace msgcn {

enum class ExportLayer { kInput, kHidden, kOutput };

ExportLayer export_layer_from_string(const std::string& name);
std::string to_string(ExportLayer layer);

// TSV of per-document vectors: `doc_id<TAB>label<TAB>v1..vd`, preceded by a
// `#layer=<name> dim=<d>` header. Input rows are the document embedding
// features, hidden rows the concatenated stream activations, output rows the
// pre-softmax pooled logits.
void export_embeddings(const Checkpoint& checkpoint, const MultiEdgeGraph& graph,
                       const Corpus& corpus, ExportLayer layer, const std::string& path);

// Reads a file produced by export_embeddings.
Matrix load_exported(const std::string& path, std::vector<int>& doc_ids,
                     std::vector<int>& labels);

}  // namespace msgcn
