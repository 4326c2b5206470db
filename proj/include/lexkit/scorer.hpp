#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexkit {

using TokenId = std::int64_t;

// Static metadata of a masked-LM scorer.
struct ScorerInfo {
  std::string model_id;
  std::int64_t vocab_size = 0;
  std::string mask_token;
  std::int64_t max_input_tokens = 0;
  // Ids the scorer adds around inputs (<s>, </s>, ...). Masked-token
  // evaluation never masks these.
  std::vector<TokenId> special_ids;

  void validate() const;
  bool operator==(const ScorerInfo&) const = default;
};

enum class TokenizeMode { standalone, with_leading_space };

std::string_view to_string(TokenizeMode mode);
std::optional<TokenizeMode> parse_tokenize_mode(std::string_view name);

struct TokenizeRequest {
  std::string text;
  TokenizeMode mode = TokenizeMode::standalone;

  bool operator==(const TokenizeRequest&) const = default;
};

struct TokenizeResponse {
  std::vector<TokenId> token_ids;
  std::vector<std::string> token_strings;

  bool operator==(const TokenizeResponse&) const = default;
};

// Cloze request: the context's single span sentinel is expanded by the
// scorer into `num_masks` mask tokens.
struct ScoreRequest {
  std::string context;
  int num_masks = 1;
  std::vector<TokenId> candidate_ids;  // shared across positions
  int topk = 0;

  bool operator==(const ScoreRequest&) const = default;
};

// Masked-token request over an already tokenized input: each listed position
// is replaced by the mask token.
struct IdFillRequest {
  std::vector<TokenId> token_ids;
  std::vector<std::size_t> mask_positions;
  std::vector<TokenId> candidate_ids;
  int topk = 1;

  bool operator==(const IdFillRequest&) const = default;
};

using ScoredToken = std::pair<TokenId, double>;

struct PositionScores {
  std::vector<ScoredToken> candidate_logprobs;  // request candidate order
  std::vector<ScoredToken> topk;                // best first

  std::optional<double> logprob_of(TokenId id) const;
  bool operator==(const PositionScores&) const = default;
};

struct ScoreResponse {
  std::vector<PositionScores> positions;
  bool truncated = false;

  bool operator==(const ScoreResponse&) const = default;
};

// Any masked language model behind the wire contract. Implementations must
// be safe to call from several threads at once.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual ScorerInfo info() = 0;
  virtual TokenizeResponse tokenize(std::string_view text, TokenizeMode mode) = 0;
  virtual ScoreResponse fill(const ScoreRequest& request) = 0;
  virtual ScoreResponse fill_ids(const IdFillRequest& request) = 0;
};

// Contract checks shared by clients and in-process scorers. All throw
// ProtocolError.
void validate_request(const ScoreRequest& request);
void validate_request(const ScoreRequest& request, const ScorerInfo& info);
void validate_request(const IdFillRequest& request, const ScorerInfo& info);
void validate_response(const ScoreResponse& response, std::size_t positions,
                       const std::vector<TokenId>& candidates, int topk);
void validate_response(const TokenizeResponse& response);

// Window [begin, end) of at most `limit` tokens out of `total` that keeps the
// span [span_begin, span_begin + span_len) and is centered on it as far as
// the edges allow. Throws ProtocolError if the span itself exceeds `limit`.
std::pair<std::size_t, std::size_t> center_window(std::size_t total, std::size_t span_begin,
                                                  std::size_t span_len, std::size_t limit);

// Best-first ordering: higher log-probability, then lower id.
bool better(const ScoredToken& a, const ScoredToken& b);

// JSON wire format.
nlohmann::json to_json(const ScorerInfo& info);
nlohmann::json to_json(const TokenizeRequest& request);
nlohmann::json to_json(const TokenizeResponse& response);
nlohmann::json to_json(const ScoreRequest& request);
nlohmann::json to_json(const IdFillRequest& request);
nlohmann::json to_json(const ScoreResponse& response);

ScorerInfo info_from_json(const nlohmann::json& obj);
TokenizeRequest tokenize_request_from_json(const nlohmann::json& obj);
TokenizeResponse tokenize_response_from_json(const nlohmann::json& obj);
ScoreRequest score_request_from_json(const nlohmann::json& obj);
IdFillRequest id_fill_request_from_json(const nlohmann::json& obj);
ScoreResponse score_response_from_json(const nlohmann::json& obj);

}  // namespace lexkit
