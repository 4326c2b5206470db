#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexkit/scorer.hpp"

namespace lexkit {

// Deterministic in-process scorers. Both are pure and reentrant.

struct HashScorerConfig {
  std::uint64_t seed = 0;
  std::int64_t vocab_size = 1000;
  std::int64_t max_input_tokens = 512;
  std::size_t max_piece_bytes = 12;
  // tokenize() rejects inputs longer than this many times max_input_tokens.
  std::int64_t tokenize_limit_factor = 4;
};

// Scores are a pure function of (seed, digest of the masked input ids,
// position, token id), normalized by a log-softmax over the full vocabulary.
//
// Tokenizer: words and single punctuation marks, long words cut into pieces
// of at most `max_piece_bytes`; a piece preceded by whitespace carries the
// byte-level marker "Ġ" like GPT-2 style vocabularies. Piece ids are hashed
// into [4, vocab_size); 0..3 are <s>, <pad>, </s>, <mask>.
class HashScorer final : public Scorer {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kPad = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kMask = 3;

  explicit HashScorer(HashScorerConfig config = {});

  ScorerInfo info() override;
  TokenizeResponse tokenize(std::string_view text, TokenizeMode mode) override;
  ScoreResponse fill(const ScoreRequest& request) override;
  ScoreResponse fill_ids(const IdFillRequest& request) override;

  std::vector<std::string> pieces(std::string_view text, TokenizeMode mode) const;
  TokenId piece_id(std::string_view piece) const;
  double logit(std::uint64_t digest, std::uint64_t position, TokenId id) const;

 private:
  PositionScores score_position(std::uint64_t digest, std::uint64_t position,
                                const std::vector<TokenId>& candidates, int topk) const;
  std::uint64_t digest(const std::vector<TokenId>& ids) const;

  HashScorerConfig config_;
  ScorerInfo info_;
};

struct TableScorerConfig {
  std::string model_id = "table";
  std::map<std::string, TokenId> vocab;  // token string -> id
  std::string mask_token = "<mask>";
  std::string unk_token = "<unk>";
  std::int64_t vocab_size = 0;  // 0: max id + 1
  std::int64_t max_input_tokens = 512;
  double default_logprob = -20.0;
  using Table = std::map<TokenId, double>;
  std::vector<Table> positions;                          // i-th mask slot
  std::map<std::string, std::vector<Table>> contexts;    // per exact context

  static TableScorerConfig from_json(const nlohmann::json& doc);
  static TableScorerConfig load(const std::filesystem::path& path);
};

// Scores come straight from a configured table; unlisted ids get
// default_logprob. Tokenization is whitespace-word lookup in `vocab`, with
// the "Ġ" marker on words preceded by a space.
class TableScorer final : public Scorer {
 public:
  explicit TableScorer(TableScorerConfig config);

  ScorerInfo info() override;
  TokenizeResponse tokenize(std::string_view text, TokenizeMode mode) override;
  ScoreResponse fill(const ScoreRequest& request) override;
  ScoreResponse fill_ids(const IdFillRequest& request) override;

 private:
  PositionScores score_position(const TableScorerConfig::Table* table,
                                const std::vector<TokenId>& candidates, int topk) const;

  TableScorerConfig config_;
  ScorerInfo info_;
  std::unordered_map<TokenId, std::string> id_to_token_;
};

inline constexpr std::string_view kSpaceMarker = "\xC4\xA0";  // "Ġ"

}  // namespace lexkit
