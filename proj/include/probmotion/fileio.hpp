#pragma once

#include <string>

// Small filesystem helpers. All writers are atomic: content lands in a
// sibling temp file first and is renamed into place, so readers never observe
// a partially written artifact.

namespace probmotion {

std::string read_text_file(const std::string& path);  // Error(io) on failure

void atomic_write_text(const std::string& path, const std::string& content);
void atomic_write_bytes(const std::string& path, const std::string& bytes);

bool file_exists(const std::string& path);

}  // namespace probmotion
