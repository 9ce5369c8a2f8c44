#pragma once

#include <filesystem>
#include <string>

namespace detour {

/// Whole-file read; a missing or unreadable file raises ErrorKind::missing_input.
std::string read_text_file(const std::filesystem::path& path);

/// Writes atomically enough for single-writer use: truncates then writes.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace detour
