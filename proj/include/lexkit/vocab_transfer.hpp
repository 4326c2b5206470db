#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexkit {

using TokenVocab = std::map<std::string, std::int64_t>;

// Parses a JSON map of token string to id, or a tokenizer file holding one
// under model.vocab. Duplicate token strings and duplicate ids are errors.
TokenVocab parse_token_vocab(std::string_view text);
TokenVocab load_token_vocab(const std::filesystem::path& path);

struct TransferEntry {
  std::int64_t new_id = 0;
  std::string token;
  std::optional<std::int64_t> copy_from;  // empty: random init

  bool operator==(const TransferEntry&) const = default;
};

struct TransferSummary {
  std::size_t n_copied = 0;
  std::size_t n_random = 0;
  double overlap_fraction = 0.0;  // n_copied / new vocabulary size
  std::size_t old_size = 0;
  std::size_t new_size = 0;

  nlohmann::json to_json() const;
};

struct TransferPlan {
  std::vector<TransferEntry> entries;  // ascending new_id
  TransferSummary summary;
};

// Exact byte equality of token strings decides reuse.
TransferPlan plan_embedding_transfer(const TokenVocab& old_vocab, const TokenVocab& new_vocab);

void write_plan(std::ostream& out, const TransferPlan& plan);

}  // namespace lexkit
