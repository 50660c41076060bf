#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace forge {

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; returns the exact bytes written.
std::string write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// 16 hex digits of FNV-1a over `bytes`.
std::string checksum_hex(const std::string& bytes);

}  // namespace forge
