#pragma once

#include <string>

namespace msgcn {

// Writes to a sibling temp file and renames it into place, so readers never
// observe a partially written artifact. Creates parent directories.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace msgcn
