#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/hashing.hpp"
#include "lexkit/mock_scorers.hpp"
#include "lexkit/probes.hpp"
#include "lexkit/text.hpp"

namespace lexkit {

namespace {

constexpr double kSpecialLogit = -30.0;

bool is_unicode_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0xA0 || cp == 0x3000 || (cp >= 0x2000 && cp <= 0x200A);
}

}  // namespace

HashScorer::HashScorer(HashScorerConfig config) : config_(config) {
  if (config_.vocab_size < 8) throw ValidationError("hash scorer vocab_size must be >= 8");
  if (config_.max_input_tokens < 4) throw ValidationError("hash scorer max_input_tokens must be >= 4");
  if (config_.max_piece_bytes < 4) throw ValidationError("hash scorer max_piece_bytes must be >= 4");
  info_.model_id = fmt::format("hash-s{}-v{}", config_.seed, config_.vocab_size);
  info_.vocab_size = config_.vocab_size;
  info_.mask_token = "<mask>";
  info_.max_input_tokens = config_.max_input_tokens;
  info_.special_ids = {kBos, kPad, kEos, kMask};
}

ScorerInfo HashScorer::info() { return info_; }

std::vector<std::string> HashScorer::pieces(std::string_view text, TokenizeMode mode) const {
  std::vector<std::string> out;
  bool space_before = mode == TokenizeMode::with_leading_space;
  std::size_t i = 0;
  const auto push_word = [&](std::string_view word, bool marked) {
    // Cut at code point boundaries into pieces of at most max_piece_bytes.
    std::size_t start = 0;
    bool first = true;
    while (start < word.size()) {
      std::size_t end = start;
      while (end < word.size()) {
        std::size_t len = 0;
        decode_utf8(word, end, &len);
        if (end + len - start > config_.max_piece_bytes && end > start) break;
        end += len;
      }
      std::string piece = (first && marked) ? std::string(kSpaceMarker) : std::string();
      piece.append(word.substr(start, end - start));
      out.push_back(std::move(piece));
      first = false;
      start = end;
    }
  };
  while (i < text.size()) {
    std::size_t len = 0;
    const char32_t cp = decode_utf8(text, i, &len);
    if (is_unicode_space(cp)) {
      space_before = true;
      i += len;
      continue;
    }
    std::size_t end = i + len;
    if (is_word_codepoint(cp)) {
      while (end < text.size()) {
        std::size_t l = 0;
        const char32_t c = decode_utf8(text, end, &l);
        if (!is_word_codepoint(c) || is_unicode_space(c)) break;
        end += l;
      }
    }
    push_word(text.substr(i, end - i), space_before);
    space_before = false;
    i = end;
  }
  return out;
}

TokenId HashScorer::piece_id(std::string_view piece) const {
  const auto span = static_cast<std::uint64_t>(config_.vocab_size - 4);
  return 4 + static_cast<TokenId>(fnv1a64(piece) % span);
}

TokenizeResponse HashScorer::tokenize(std::string_view text, TokenizeMode mode) {
  if (text.empty()) throw ProtocolError("tokenize: text must be non-empty");
  TokenizeResponse out;
  out.token_strings = pieces(text, mode);
  const auto limit = static_cast<std::size_t>(config_.max_input_tokens * config_.tokenize_limit_factor);
  if (out.token_strings.size() > limit) {
    throw ProtocolError(fmt::format(
        "tokenize: text of {} tokens is oversize (max_input_tokens = {}, limit {})",
        out.token_strings.size(), config_.max_input_tokens, limit));
  }
  out.token_ids.reserve(out.token_strings.size());
  for (const auto& p : out.token_strings) out.token_ids.push_back(piece_id(p));
  return out;
}

std::uint64_t HashScorer::digest(const std::vector<TokenId>& ids) const {
  std::uint64_t h = mix64(config_.seed);
  for (TokenId id : ids) h = combine(h, static_cast<std::uint64_t>(id));
  return h;
}

double HashScorer::logit(std::uint64_t digest, std::uint64_t position, TokenId id) const {
  if (id < 4) return kSpecialLogit;
  // 20-bit quantized logits in (-16, 0]: distinct values stay distinct after
  // the log-softmax shift on every platform.
  const std::uint64_t h = combine(combine(digest, position), static_cast<std::uint64_t>(id));
  return -static_cast<double>(h >> 44) / 65536.0;
}

PositionScores HashScorer::score_position(std::uint64_t digest, std::uint64_t position,
                                          const std::vector<TokenId>& candidates,
                                          int topk) const {
  std::vector<double> logits(static_cast<std::size_t>(config_.vocab_size));
  double max_logit = -INFINITY;
  for (TokenId v = 0; v < config_.vocab_size; ++v) {
    logits[v] = logit(digest, position, v);
    max_logit = std::max(max_logit, logits[v]);
  }
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max_logit);
  const double lse = max_logit + std::log(sum);

  PositionScores out;
  out.candidate_logprobs.reserve(candidates.size());
  for (TokenId id : candidates) out.candidate_logprobs.emplace_back(id, logits[id] - lse);
  if (topk > 0) {
    std::vector<ScoredToken> all;
    all.reserve(logits.size());
    for (TokenId v = 0; v < config_.vocab_size; ++v) all.emplace_back(v, logits[v] - lse);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(topk), all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
    all.resize(k);
    out.topk = std::move(all);
  }
  return out;
}

ScoreResponse HashScorer::fill(const ScoreRequest& request) {
  validate_request(request, info_);
  const auto at = request.context.find(kSpanSentinel);
  const std::string_view ctx = request.context;
  const auto left = pieces(ctx.substr(0, at), TokenizeMode::standalone);
  const auto right = pieces(ctx.substr(at + kSpanSentinel.size()), TokenizeMode::standalone);

  std::vector<TokenId> inner;
  for (const auto& p : left) inner.push_back(piece_id(p));
  const std::size_t span_begin = inner.size();
  inner.insert(inner.end(), static_cast<std::size_t>(request.num_masks), kMask);
  for (const auto& p : right) inner.push_back(piece_id(p));

  const auto budget = static_cast<std::size_t>(config_.max_input_tokens - 2);
  const auto [b, e] = center_window(inner.size(), span_begin,
                                    static_cast<std::size_t>(request.num_masks), budget);
  std::vector<TokenId> seq{kBos};
  seq.insert(seq.end(), inner.begin() + static_cast<std::ptrdiff_t>(b),
             inner.begin() + static_cast<std::ptrdiff_t>(e));
  seq.push_back(kEos);

  ScoreResponse out;
  out.truncated = e - b < inner.size();
  const std::uint64_t d = digest(seq);
  for (int i = 0; i < request.num_masks; ++i) {
    out.positions.push_back(
        score_position(d, static_cast<std::uint64_t>(i + 1), request.candidate_ids, request.topk));
  }
  return out;
}

ScoreResponse HashScorer::fill_ids(const IdFillRequest& request) {
  validate_request(request, info_);
  std::vector<TokenId> inner = request.token_ids;
  for (std::size_t p : request.mask_positions) inner[p] = kMask;
  const auto [lo, hi] =
      std::minmax_element(request.mask_positions.begin(), request.mask_positions.end());
  const auto budget = static_cast<std::size_t>(config_.max_input_tokens - 2);
  const auto [b, e] = center_window(inner.size(), *lo, *hi - *lo + 1, budget);
  std::vector<TokenId> seq{kBos};
  seq.insert(seq.end(), inner.begin() + static_cast<std::ptrdiff_t>(b),
             inner.begin() + static_cast<std::ptrdiff_t>(e));
  seq.push_back(kEos);

  ScoreResponse out;
  out.truncated = e - b < inner.size();
  const std::uint64_t d = digest(seq);
  for (std::size_t p : request.mask_positions) {
    out.positions.push_back(score_position(d, static_cast<std::uint64_t>(p - b + 1),
                                           request.candidate_ids, request.topk));
  }
  return out;
}

}  // namespace lexkit
