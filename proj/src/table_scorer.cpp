#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/mock_scorers.hpp"
#include "lexkit/probes.hpp"
#include "lexkit/text.hpp"

namespace lexkit {

using nlohmann::json;

namespace {

TableScorerConfig::Table table_from_json(const json& obj) {
  if (!obj.is_object()) throw ValidationError("score table must map token ids to log-probabilities");
  TableScorerConfig::Table t;
  for (const auto& [key, value] : obj.items()) {
    if (!value.is_number()) throw ValidationError("score table values must be numbers");
    try {
      t[std::stoll(key)] = value.get<double>();
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("score table key '{}' is not a token id", key));
    }
  }
  return t;
}

std::vector<TableScorerConfig::Table> tables_from_json(const json& arr) {
  if (!arr.is_array()) throw ValidationError("position tables must be an array");
  std::vector<TableScorerConfig::Table> out;
  for (const auto& t : arr) out.push_back(table_from_json(t));
  return out;
}

}  // namespace

TableScorerConfig TableScorerConfig::from_json(const json& doc) {
  TableScorerConfig c;
  if (!doc.is_object() || !doc.contains("vocab")) {
    throw ValidationError("table scorer config needs a vocab object");
  }
  c.model_id = doc.value("model_id", c.model_id);
  for (const auto& [tok, id] : doc["vocab"].items()) c.vocab[tok] = id.get<TokenId>();
  c.mask_token = doc.value("mask_token", c.mask_token);
  c.unk_token = doc.value("unk_token", c.unk_token);
  c.vocab_size = doc.value("vocab_size", c.vocab_size);
  c.max_input_tokens = doc.value("max_input_tokens", c.max_input_tokens);
  c.default_logprob = doc.value("default_logprob", c.default_logprob);
  if (doc.contains("positions")) c.positions = tables_from_json(doc["positions"]);
  if (doc.contains("contexts")) {
    for (const auto& [ctx, tables] : doc["contexts"].items()) {
      c.contexts[ctx] = tables_from_json(tables);
    }
  }
  return c;
}

TableScorerConfig TableScorerConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open table scorer config {}", path.string()));
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("table scorer config is not valid JSON");
  return from_json(doc);
}

TableScorer::TableScorer(TableScorerConfig config) : config_(std::move(config)) {
  TokenId max_id = -1;
  for (const auto& [tok, id] : config_.vocab) {
    if (id < 0) throw ValidationError("table scorer ids must be non-negative");
    if (!id_to_token_.emplace(id, tok).second) {
      throw ValidationError(fmt::format("table scorer id {} assigned twice", id));
    }
    max_id = std::max(max_id, id);
  }
  if (!config_.vocab.contains(config_.mask_token)) {
    throw ValidationError("table scorer vocab lacks the mask token");
  }
  info_.model_id = config_.model_id;
  info_.vocab_size = config_.vocab_size > 0 ? config_.vocab_size : max_id + 1;
  if (info_.vocab_size <= max_id) throw ValidationError("vocab_size smaller than the largest id");
  info_.mask_token = config_.mask_token;
  info_.max_input_tokens = config_.max_input_tokens;
  info_.special_ids = {config_.vocab.at(config_.mask_token)};
  info_.validate();
}

ScorerInfo TableScorer::info() { return info_; }

TokenizeResponse TableScorer::tokenize(std::string_view text, TokenizeMode mode) {
  if (text.empty()) throw ProtocolError("tokenize: text must be non-empty");
  TokenizeResponse out;
  bool marked = mode == TokenizeMode::with_leading_space ||
                (!text.empty() && is_space(text.front()));
  for (std::string_view word : whitespace_tokens(text)) {
    std::string piece = marked ? std::string(kSpaceMarker) + std::string(word) : std::string(word);
    auto it = config_.vocab.find(piece);
    if (it == config_.vocab.end()) {
      it = config_.vocab.find(config_.unk_token);
      if (it == config_.vocab.end()) {
        throw ProtocolError(fmt::format("tokenize: '{}' not in vocabulary and no unk token", piece));
      }
    }
    out.token_ids.push_back(it->second);
    out.token_strings.push_back(std::move(piece));
    marked = true;
  }
  if (out.token_ids.size() > static_cast<std::size_t>(config_.max_input_tokens) * 4) {
    throw ProtocolError(fmt::format("tokenize: text is oversize (max_input_tokens = {})",
                                    config_.max_input_tokens));
  }
  return out;
}

PositionScores TableScorer::score_position(const TableScorerConfig::Table* table,
                                           const std::vector<TokenId>& candidates,
                                           int topk) const {
  const auto score = [&](TokenId id) {
    if (table) {
      if (const auto it = table->find(id); it != table->end()) return it->second;
    }
    return config_.default_logprob;
  };
  PositionScores out;
  for (TokenId id : candidates) out.candidate_logprobs.emplace_back(id, score(id));
  if (topk > 0) {
    std::vector<ScoredToken> all;
    for (TokenId v = 0; v < info_.vocab_size; ++v) all.emplace_back(v, score(v));
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(topk), all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
    all.resize(k);
    out.topk = std::move(all);
  }
  return out;
}

ScoreResponse TableScorer::fill(const ScoreRequest& request) {
  validate_request(request, info_);
  const auto ctx = config_.contexts.find(request.context);
  const auto& tables = ctx != config_.contexts.end() ? ctx->second : config_.positions;
  ScoreResponse out;
  for (int i = 0; i < request.num_masks; ++i) {
    const auto* table = static_cast<std::size_t>(i) < tables.size() ? &tables[i] : nullptr;
    out.positions.push_back(score_position(table, request.candidate_ids, request.topk));
  }
  return out;
}

ScoreResponse TableScorer::fill_ids(const IdFillRequest& request) {
  validate_request(request, info_);
  ScoreResponse out;
  out.truncated = request.token_ids.size() > static_cast<std::size_t>(info_.max_input_tokens);
  for (std::size_t i = 0; i < request.mask_positions.size(); ++i) {
    const auto* table = i < config_.positions.size() ? &config_.positions[i] : nullptr;
    out.positions.push_back(score_position(table, request.candidate_ids, request.topk));
  }
  return out;
}

}  // namespace lexkit
