#include "lexkit/vocab_transfer.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/run_header.hpp"

namespace lexkit {

using nlohmann::json;

namespace {

// Rejects duplicate keys in any object. The DOM parser keeps the last value
// silently, which would hide a corrupt vocabulary.
class DuplicateKeyCheck : public nlohmann::json_sax<json> {
 public:
  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t) override { return true; }
  bool number_unsigned(number_unsigned_t) override { return true; }
  bool number_float(number_float_t, const string_t&) override { return true; }
  bool string(string_t&) override { return true; }
  bool binary(binary_t&) override { return true; }
  bool start_object(std::size_t) override {
    keys_.emplace_back();
    return true;
  }
  bool key(string_t& k) override {
    if (!keys_.back().insert(k).second) {
      duplicate_ = k;
      return false;
    }
    return true;
  }
  bool end_object() override {
    keys_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override { return true; }
  bool end_array() override { return true; }
  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& e) override {
    error_ = fmt::format("at byte {}: {}", position, e.what());
    return false;
  }

  const std::optional<std::string>& duplicate() const { return duplicate_; }
  const std::optional<std::string>& error() const { return error_; }

 private:
  std::vector<std::unordered_set<std::string>> keys_;
  std::optional<std::string> duplicate_;
  std::optional<std::string> error_;
};

}  // namespace

TokenVocab parse_token_vocab(std::string_view text) {
  DuplicateKeyCheck check;
  json::sax_parse(text.begin(), text.end(), &check);
  if (check.duplicate()) {
    throw ValidationError(fmt::format("vocabulary lists token '{}' twice", *check.duplicate()));
  }
  if (check.error()) throw ValidationError(fmt::format("vocabulary is not valid JSON {}", *check.error()));

  const json doc = json::parse(text);
  const json* map = &doc;
  if (doc.is_object() && doc.contains("model") && doc["model"].is_object() &&
      doc["model"].contains("vocab")) {
    map = &doc["model"]["vocab"];
  }
  if (!map->is_object() || map->empty()) {
    throw ValidationError("vocabulary must be a non-empty JSON object of token -> id");
  }
  TokenVocab vocab;
  std::unordered_set<std::int64_t> ids;
  for (const auto& [token, id] : map->items()) {
    if (!id.is_number_integer() || id.get<std::int64_t>() < 0) {
      throw ValidationError(fmt::format("token '{}' needs a non-negative integer id", token));
    }
    const auto v = id.get<std::int64_t>();
    if (!ids.insert(v).second) throw ValidationError(fmt::format("id {} assigned twice", v));
    vocab.emplace(token, v);
  }
  return vocab;
}

TokenVocab load_token_vocab(const std::filesystem::path& path) {
  return parse_token_vocab(read_file(path));
}

json TransferSummary::to_json() const {
  return {{"n_copied", n_copied},
          {"n_random", n_random},
          {"overlap_fraction", overlap_fraction},
          {"old_vocab_size", old_size},
          {"new_vocab_size", new_size}};
}

TransferPlan plan_embedding_transfer(const TokenVocab& old_vocab, const TokenVocab& new_vocab) {
  if (old_vocab.empty() || new_vocab.empty()) {
    throw ValidationError("both vocabularies must be non-empty");
  }
  TransferPlan plan;
  for (const auto& [token, new_id] : new_vocab) {
    TransferEntry e{new_id, token, std::nullopt};
    if (const auto it = old_vocab.find(token); it != old_vocab.end()) {
      e.copy_from = it->second;
      ++plan.summary.n_copied;
    } else {
      ++plan.summary.n_random;
    }
    plan.entries.push_back(std::move(e));
  }
  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const TransferEntry& a, const TransferEntry& b) { return a.new_id < b.new_id; });
  plan.summary.old_size = old_vocab.size();
  plan.summary.new_size = new_vocab.size();
  plan.summary.overlap_fraction =
      static_cast<double>(plan.summary.n_copied) / static_cast<double>(new_vocab.size());
  return plan;
}

void write_plan(std::ostream& out, const TransferPlan& plan) {
  for (const auto& e : plan.entries) {
    json line{{"new_id", e.new_id}, {"token", e.token}};
    if (e.copy_from) {
      line["action"] = "copy_from";
      line["old_id"] = *e.copy_from;
    } else {
      line["action"] = "random_init";
    }
    out << line.dump() << '\n';
  }
}

}  // namespace lexkit
