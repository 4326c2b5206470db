#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace lexkit {

inline constexpr std::string_view kToolName = "lexkit";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kHeaderKey = "lexkit_header";

// Self-describing header written at the top of every output file. The
// digest covers the resolved configuration only, so identical reruns
// reproduce it.
struct RunHeader {
  std::string subcommand;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();

  std::string config_digest() const;
  nlohmann::json to_json() const;
};

// Inputs are identified by file name and content digest, never by absolute
// path, so outputs do not depend on where the inputs live.
nlohmann::json describe_input(const std::filesystem::path& path);

std::string content_digest(std::string_view bytes);

void write_jsonl_header(std::ostream& out, const RunHeader& header);
std::string markdown_header(const RunHeader& header);
std::string csv_header(const RunHeader& header);

bool is_header_line(const nlohmann::json& line);

// Calls `visit` for every non-header, non-blank line. Lines that are not
// valid JSON raise ValidationError.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&)>& visit);

std::optional<nlohmann::json> read_jsonl_header(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace lexkit
