#include "lexkit/run_header.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/hashing.hpp"

namespace lexkit {

using nlohmann::json;

std::string RunHeader::config_digest() const { return content_digest(config.dump()); }

json RunHeader::to_json() const {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"subcommand", subcommand},
          {"seed", seed},
          {"config", config},
          {"config_digest", config_digest()}};
}

std::string content_digest(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

json describe_input(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  return {{"name", path.filename().string()},
          {"bytes", bytes.size()},
          {"digest", content_digest(bytes)}};
}

void write_jsonl_header(std::ostream& out, const RunHeader& header) {
  out << json{{std::string(kHeaderKey), header.to_json()}}.dump() << '\n';
}

std::string markdown_header(const RunHeader& header) {
  return fmt::format("<!-- {} -->\n", json{{std::string(kHeaderKey), header.to_json()}}.dump());
}

std::string csv_header(const RunHeader& header) {
  return fmt::format("# {}\n", json{{std::string(kHeaderKey), header.to_json()}}.dump());
}

bool is_header_line(const json& line) {
  return line.is_object() && line.contains(std::string(kHeaderKey));
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&)>& visit) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
      throw ValidationError(fmt::format("{}:{}: invalid JSON", path.string(), line_no));
    }
    if (is_header_line(obj)) continue;
    visit(obj);
  }
}

std::optional<json> read_jsonl_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !is_header_line(obj)) return std::nullopt;
  return obj[std::string(kHeaderKey)];
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << content;
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

}  // namespace lexkit
