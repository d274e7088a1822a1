#pragma once

#include <string>
#include <string_view>

namespace tscore {

// Writes `bytes` to a temporary file next to `path` and renames it into
// place, so readers never observe a partially written file.
void write_atomically(const std::string& path, std::string_view bytes);

std::string read_file(const std::string& path);

}  // namespace tscore
