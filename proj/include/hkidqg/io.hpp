#pragma once

#include <string>
#include <vector>

namespace hkidqg {

/// Writes to "<path>.tmp" and renames over `path`, so readers never observe
/// a partially written file under the final name.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace hkidqg
