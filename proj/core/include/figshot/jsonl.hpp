#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace figshot::jsonl {

/// Calls `fn(record, line_number)` for every non-blank line. Line numbers are
/// 1-based. Parse failures raise figshot::Error naming the file and line.
void for_each(const std::filesystem::path& path,
              const std::function<void(const nlohmann::json&, std::size_t)>& fn);

std::vector<nlohmann::json> read_all(const std::filesystem::path& path);

/// Compact single-line dump with a trailing newline.
std::string dump_line(const nlohmann::json& record);

void write_all(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace figshot::jsonl
