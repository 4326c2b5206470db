#include "lexkit/vocabulary.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/text.hpp"

namespace lexkit {

using nlohmann::json;

std::string_view to_string(MatchPolicy policy) {
  return policy == MatchPolicy::case_insensitive ? "case_insensitive" : "case_sensitive";
}

std::optional<MatchPolicy> parse_match_policy(std::string_view name) {
  if (name == "case_sensitive") return MatchPolicy::case_sensitive;
  if (name == "case_insensitive") return MatchPolicy::case_insensitive;
  return std::nullopt;
}

TermVocabulary::TermVocabulary(std::string task_id, std::vector<Label> labels,
                               MatchPolicy policy)
    : task_id_(std::move(task_id)), labels_(std::move(labels)), policy_(policy) {
  validate();
  for (std::size_t i = 0; i < labels_.size(); ++i) index_.emplace(labels_[i].surface, i);
}

void TermVocabulary::validate() const {
  if (task_id_.empty()) throw ValidationError("vocabulary task_id is empty");
  if (labels_.size() < 2) {
    throw ValidationError(
        fmt::format("vocabulary '{}' needs at least 2 labels, has {}", task_id_, labels_.size()));
  }
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& l : labels_) {
    if (trim(l.surface).empty() || trim(l.surface).size() != l.surface.size()) {
      throw ValidationError(fmt::format(
          "vocabulary '{}': label surface '{}' is empty or has surrounding whitespace",
          task_id_, l.surface));
    }
    if (l.cluster.empty()) {
      throw ValidationError(
          fmt::format("vocabulary '{}': label '{}' has an empty cluster", task_id_, l.surface));
    }
    const std::string key =
        policy_ == MatchPolicy::case_insensitive ? ascii_lower(l.surface) : l.surface;
    if (!seen.emplace(key, 0).second) {
      throw ValidationError(
          fmt::format("vocabulary '{}': duplicate label surface '{}'", task_id_, l.surface));
    }
  }
}

TermVocabulary TermVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open vocabulary {}", path.string()));
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw ValidationError(fmt::format("vocabulary {} is not valid JSON", path.string()));
  }
  return from_json(doc);
}

TermVocabulary TermVocabulary::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("task_id") || !doc.contains("labels") ||
      !doc["labels"].is_array()) {
    throw ValidationError("vocabulary needs fields task_id and labels");
  }
  MatchPolicy policy = MatchPolicy::case_sensitive;
  if (doc.contains("match_policy")) {
    const auto parsed = parse_match_policy(doc["match_policy"].get<std::string>());
    if (!parsed) throw ValidationError("match_policy must be case_sensitive or case_insensitive");
    policy = *parsed;
  }
  std::vector<Label> labels;
  for (const auto& l : doc["labels"]) {
    if (!l.is_object() || !l.contains("surface") || !l["surface"].is_string() ||
        !l.contains("cluster") || !l["cluster"].is_string()) {
      throw ValidationError("each label needs string fields surface and cluster");
    }
    labels.push_back({l["surface"].get<std::string>(), l["cluster"].get<std::string>()});
  }
  return TermVocabulary(doc["task_id"].get<std::string>(), std::move(labels), policy);
}

json TermVocabulary::to_json() const {
  json labels = json::array();
  for (const auto& l : labels_) labels.push_back({{"surface", l.surface}, {"cluster", l.cluster}});
  return {{"task_id", task_id_}, {"match_policy", to_string(policy_)}, {"labels", labels}};
}

std::optional<std::size_t> TermVocabulary::find(std::string_view surface) const {
  const auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> TermVocabulary::clusters() const {
  std::vector<std::string> out;
  for (const auto& l : labels_) {
    if (std::find(out.begin(), out.end(), l.cluster) == out.end()) out.push_back(l.cluster);
  }
  return out;
}

}  // namespace lexkit
