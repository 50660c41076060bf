#include "forge/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/random.hpp"

namespace forge {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", path.parent_path().string(), ec.message()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

std::string write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::string text = j.dump(1) + "\n";
  write_text_file(path, text);
  return text;
}

std::string checksum_hex(const std::string& bytes) { return fmt::format("{:016x}", fnv1a(bytes)); }

}  // namespace forge
