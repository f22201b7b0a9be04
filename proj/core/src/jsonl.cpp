#include "figshot/jsonl.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "figshot/error.hpp"

namespace figshot::jsonl {

void for_each(const std::filesystem::path& path,
              const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(fmt::format("{}:{}: malformed JSON: {}", path.string(), line_no, e.what()));
    }
    if (!record.is_object()) {
      throw Error(fmt::format("{}:{}: expected a JSON object", path.string(), line_no));
    }
    fn(record, line_no);
  }
}

std::vector<nlohmann::json> read_all(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  for_each(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(j); });
  return out;
}

std::string dump_line(const nlohmann::json& record) {
  return record.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) + "\n";
}

void write_all(const std::filesystem::path& path, const std::vector<nlohmann::json>& records) {
  std::string text;
  for (const auto& r : records) text += dump_line(r);
  write_text(path, text);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace figshot::jsonl
