#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace proverb {

// Reads a whole file as bytes. Missing or unreadable files throw Error(IoError).
std::string read_file(const std::filesystem::path& path);

// Writes via a temporary sibling and rename, so readers see either the old
// file or the complete new one. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace proverb
