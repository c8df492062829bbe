#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cutofflab::io {

// Shortest decimal text that round-trips to the same double. Locale independent,
// so CSV payloads are byte-stable across runs.
std::string format_double(double value);

// Writes to a sibling temporary file and renames it over `path`, so readers never
// observe a partially written file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace cutofflab::io
