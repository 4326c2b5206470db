#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/probes.hpp"
#include "lexkit/scorer.hpp"

namespace lexkit {

using nlohmann::json;

void ScorerInfo::validate() const {
  if (vocab_size < 2) throw ProtocolError(fmt::format("vocab_size {} < 2", vocab_size));
  if (mask_token.empty()) throw ProtocolError("mask_token is empty");
  if (max_input_tokens < 1) throw ProtocolError("max_input_tokens must be positive");
}

std::string_view to_string(TokenizeMode mode) {
  return mode == TokenizeMode::with_leading_space ? "with_leading_space" : "standalone";
}

std::optional<TokenizeMode> parse_tokenize_mode(std::string_view name) {
  if (name == "standalone") return TokenizeMode::standalone;
  if (name == "with_leading_space") return TokenizeMode::with_leading_space;
  return std::nullopt;
}

std::optional<double> PositionScores::logprob_of(TokenId id) const {
  for (const auto& [tok, lp] : candidate_logprobs) {
    if (tok == id) return lp;
  }
  return std::nullopt;
}

bool better(const ScoredToken& a, const ScoredToken& b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first < b.first;
}

namespace {

void check_unique(const std::vector<TokenId>& ids) {
  std::unordered_set<TokenId> seen;
  for (TokenId id : ids) {
    if (!seen.insert(id).second) throw ProtocolError(fmt::format("duplicate candidate id {}", id));
  }
}

void check_range(const std::vector<TokenId>& ids, const ScorerInfo& info, std::string_view what) {
  for (TokenId id : ids) {
    if (id < 0 || id >= info.vocab_size) {
      throw ProtocolError(
          fmt::format("{} id {} outside vocabulary of size {}", what, id, info.vocab_size));
    }
  }
}

}  // namespace

void validate_request(const ScoreRequest& request) {
  const std::size_t sentinels = count_sentinels(request.context);
  if (sentinels != 1) {
    throw ProtocolError(
        fmt::format("context must contain exactly one {} sentinel, found {}", kSpanSentinel,
                    sentinels));
  }
  if (request.num_masks < 1) throw ProtocolError("num_masks must be >= 1");
  if (request.topk < 0) throw ProtocolError("topk must be >= 0");
  check_unique(request.candidate_ids);
}

void validate_request(const ScoreRequest& request, const ScorerInfo& info) {
  validate_request(request);
  check_range(request.candidate_ids, info, "candidate");
}

void validate_request(const IdFillRequest& request, const ScorerInfo& info) {
  if (request.token_ids.empty()) throw ProtocolError("token_ids is empty");
  if (request.mask_positions.empty()) throw ProtocolError("mask_positions is empty");
  if (request.topk < 0) throw ProtocolError("topk must be >= 0");
  check_unique(request.candidate_ids);
  check_range(request.candidate_ids, info, "candidate");
  check_range(request.token_ids, info, "input");
  std::unordered_set<std::size_t> seen;
  for (std::size_t p : request.mask_positions) {
    if (p >= request.token_ids.size()) {
      throw ProtocolError(fmt::format("mask position {} outside input of {} tokens", p,
                                      request.token_ids.size()));
    }
    if (!seen.insert(p).second) throw ProtocolError(fmt::format("duplicate mask position {}", p));
  }
}

void validate_response(const ScoreResponse& response, std::size_t positions,
                       const std::vector<TokenId>& candidates, int topk) {
  if (response.positions.size() != positions) {
    throw ProtocolError(fmt::format("response has {} positions, expected {}",
                                    response.positions.size(), positions));
  }
  for (const auto& pos : response.positions) {
    for (const auto& [id, lp] : pos.candidate_logprobs) {
      if (!std::isfinite(lp)) throw ProtocolError(fmt::format("non-finite score for id {}", id));
    }
    for (const auto& [id, lp] : pos.topk) {
      if (!std::isfinite(lp)) throw ProtocolError(fmt::format("non-finite score for id {}", id));
    }
    for (TokenId id : candidates) {
      if (!pos.logprob_of(id)) throw ProtocolError(fmt::format("response lacks candidate {}", id));
    }
    if (pos.topk.size() > static_cast<std::size_t>(topk)) {
      throw ProtocolError("response topk longer than requested");
    }
  }
}

void validate_response(const TokenizeResponse& response) {
  if (response.token_ids.size() != response.token_strings.size()) {
    throw ProtocolError("token_ids and token_strings differ in length");
  }
}

std::pair<std::size_t, std::size_t> center_window(std::size_t total, std::size_t span_begin,
                                                  std::size_t span_len, std::size_t limit) {
  if (span_len > limit) {
    throw ProtocolError(
        fmt::format("masked span of {} tokens exceeds the input limit {}", span_len, limit));
  }
  if (total <= limit) return {0, total};
  const std::size_t spare = limit - span_len;
  std::size_t left = spare / 2;
  std::size_t right = spare - left;
  const std::size_t avail_left = span_begin;
  const std::size_t avail_right = total - span_begin - span_len;
  if (avail_left < left) {
    right += left - avail_left;
    left = avail_left;
  }
  if (avail_right < right) {
    left += right - avail_right;
    right = avail_right;
  }
  return {span_begin - left, span_begin + span_len + right};
}

// ---------------------------------------------------------------------------
// Wire format

namespace {

json pairs_to_json(const std::vector<ScoredToken>& pairs) {
  json out = json::array();
  for (const auto& [id, lp] : pairs) out.push_back(json::array({id, lp}));
  return out;
}

// Accepts [[id, logprob], ...] or {"id": logprob, ...}.
std::vector<ScoredToken> pairs_from_json(const json& value) {
  std::vector<ScoredToken> out;
  if (value.is_array()) {
    for (const auto& p : value) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number()) {
        throw ProtocolError("scored token must be [id, logprob]");
      }
      out.emplace_back(p[0].get<TokenId>(), p[1].get<double>());
    }
  } else if (value.is_object()) {
    for (const auto& [key, lp] : value.items()) {
      if (!lp.is_number()) throw ProtocolError("log-probability must be a number");
      TokenId id = 0;
      try {
        std::size_t used = 0;
        id = std::stoll(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw ProtocolError(fmt::format("token id key '{}' is not an integer", key));
      }
      out.emplace_back(id, lp.get<double>());
    }
  } else {
    throw ProtocolError("expected a list of [id, logprob] pairs");
  }
  return out;
}

template <typename T>
T field(const json& obj, const char* name) {
  const auto it = obj.find(name);
  if (it == obj.end()) throw ProtocolError(fmt::format("missing field '{}'", name));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(fmt::format("field '{}' has the wrong type", name));
  }
}

template <typename T>
T field_or(const json& obj, const char* name, T fallback) {
  return obj.contains(name) ? field<T>(obj, name) : fallback;
}

void require_object(const json& obj) {
  if (!obj.is_object()) throw ProtocolError("payload must be a JSON object");
}

}  // namespace

json to_json(const ScorerInfo& info) {
  return {{"model_id", info.model_id},
          {"vocab_size", info.vocab_size},
          {"mask_token", info.mask_token},
          {"max_input_tokens", info.max_input_tokens},
          {"special_ids", info.special_ids}};
}

json to_json(const TokenizeRequest& request) {
  return {{"text", request.text}, {"mode", to_string(request.mode)}};
}

json to_json(const TokenizeResponse& response) {
  return {{"token_ids", response.token_ids}, {"token_strings", response.token_strings}};
}

json to_json(const ScoreRequest& request) {
  return {{"context", request.context},
          {"num_masks", request.num_masks},
          {"candidate_ids", request.candidate_ids},
          {"topk", request.topk}};
}

json to_json(const IdFillRequest& request) {
  return {{"token_ids", request.token_ids},
          {"mask_positions", request.mask_positions},
          {"candidate_ids", request.candidate_ids},
          {"topk", request.topk}};
}

json to_json(const ScoreResponse& response) {
  json positions = json::array();
  for (const auto& p : response.positions) {
    positions.push_back({{"candidate_logprobs", pairs_to_json(p.candidate_logprobs)},
                         {"topk", pairs_to_json(p.topk)}});
  }
  return {{"positions", positions}, {"truncated", response.truncated}};
}

ScorerInfo info_from_json(const json& obj) {
  require_object(obj);
  ScorerInfo info;
  info.model_id = field<std::string>(obj, "model_id");
  info.vocab_size = field<std::int64_t>(obj, "vocab_size");
  info.mask_token = field<std::string>(obj, "mask_token");
  info.max_input_tokens = field<std::int64_t>(obj, "max_input_tokens");
  info.special_ids = field_or<std::vector<TokenId>>(obj, "special_ids", {});
  return info;
}

TokenizeRequest tokenize_request_from_json(const json& obj) {
  require_object(obj);
  TokenizeRequest r;
  r.text = field<std::string>(obj, "text");
  const auto mode = parse_tokenize_mode(field_or<std::string>(obj, "mode", "standalone"));
  if (!mode) throw ProtocolError("mode must be standalone or with_leading_space");
  r.mode = *mode;
  return r;
}

TokenizeResponse tokenize_response_from_json(const json& obj) {
  require_object(obj);
  TokenizeResponse r;
  r.token_ids = field<std::vector<TokenId>>(obj, "token_ids");
  r.token_strings = field<std::vector<std::string>>(obj, "token_strings");
  return r;
}

ScoreRequest score_request_from_json(const json& obj) {
  require_object(obj);
  ScoreRequest r;
  r.context = field<std::string>(obj, "context");
  r.num_masks = field<int>(obj, "num_masks");
  r.candidate_ids = field_or<std::vector<TokenId>>(obj, "candidate_ids", {});
  r.topk = field_or<int>(obj, "topk", 0);
  return r;
}

IdFillRequest id_fill_request_from_json(const json& obj) {
  require_object(obj);
  IdFillRequest r;
  r.token_ids = field<std::vector<TokenId>>(obj, "token_ids");
  r.mask_positions = field<std::vector<std::size_t>>(obj, "mask_positions");
  r.candidate_ids = field_or<std::vector<TokenId>>(obj, "candidate_ids", {});
  r.topk = field_or<int>(obj, "topk", 1);
  return r;
}

ScoreResponse score_response_from_json(const json& obj) {
  require_object(obj);
  ScoreResponse r;
  const auto it = obj.find("positions");
  if (it == obj.end() || !it->is_array()) throw ProtocolError("missing array 'positions'");
  for (const auto& p : *it) {
    require_object(p);
    PositionScores ps;
    if (p.contains("candidate_logprobs")) ps.candidate_logprobs = pairs_from_json(p["candidate_logprobs"]);
    if (p.contains("topk")) ps.topk = pairs_from_json(p["topk"]);
    r.positions.push_back(std::move(ps));
  }
  r.truncated = field_or<bool>(obj, "truncated", false);
  return r;
}

}  // namespace lexkit
