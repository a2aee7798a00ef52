#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace poskit {

/// Whole-file read; throws Io on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it over `path`, creating parent
/// directories as needed. Readers never observe a partial file.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace poskit
