#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexkit {

enum class MatchPolicy { case_sensitive, case_insensitive };

std::string_view to_string(MatchPolicy policy);
std::optional<MatchPolicy> parse_match_policy(std::string_view name);

struct Label {
  std::string surface;
  std::string cluster;
};

// Cluster-structured label list of one probing task.
class TermVocabulary {
 public:
  TermVocabulary() = default;
  TermVocabulary(std::string task_id, std::vector<Label> labels,
                 MatchPolicy policy = MatchPolicy::case_sensitive);

  static TermVocabulary load(const std::filesystem::path& path);
  static TermVocabulary from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  const std::string& task_id() const { return task_id_; }
  const std::vector<Label>& labels() const { return labels_; }
  MatchPolicy match_policy() const { return policy_; }

  std::optional<std::size_t> find(std::string_view surface) const;
  // Cluster names in first-appearance order.
  std::vector<std::string> clusters() const;

 private:
  void validate() const;

  std::string task_id_;
  std::vector<Label> labels_;
  MatchPolicy policy_ = MatchPolicy::case_sensitive;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace lexkit
