#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace duet {

/// Whole-file reads and writes; failures raise IoError, malformed JSON raises ParseError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace duet
