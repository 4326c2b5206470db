#pragma once

// Randomized cloze score tables and a full-sort reference for ranks.

#include <algorithm>
#include <map>
#include <set>

#include "lexkit/evaluator.hpp"
#include "lexkit/probes.hpp"
#include "lexkit/random.hpp"
#include "lexkit/vocabulary.hpp"
#include "test_support.hpp"

namespace lexkit::testing {

struct RandomTable {
  std::vector<Label> labels;
  std::map<std::string, std::vector<TokenId>> tokens;
  std::vector<std::map<TokenId, double>> positions;  // scores per mask slot
  ProbeInstance instance;
};

inline RandomTable random_table(Rng& rng) {
  RandomTable t;
  const std::size_t n_labels = 2 + rng.below(5);  // 2..6
  const TokenId pool = 4 + static_cast<TokenId>(rng.below(12));
  for (std::size_t l = 0; l < n_labels; ++l) {
    const std::string surface = "label" + std::to_string(l);
    t.labels.push_back({surface, "c" + std::to_string(rng.below(3))});
    std::vector<TokenId> ids;
    const std::size_t k = 1 + rng.below(4);  // 1..4 sub-tokens
    for (std::size_t i = 0; i < k; ++i) ids.push_back(static_cast<TokenId>(rng.below(pool)));
    if (l < 2) ids[0] = static_cast<TokenId>(l);  // at least two distinct candidates
    t.tokens[surface] = ids;
  }
  const auto& gold = t.labels[rng.below(n_labels)];
  const std::size_t k = t.tokens[gold.surface].size();
  for (std::size_t p = 0; p < k; ++p) {
    std::map<TokenId, double> scores;
    // Coarse grid so ties are common.
    for (TokenId id = 0; id < pool; ++id) scores[id] = -static_cast<double>(rng.below(6)) * 0.5;
    t.positions.push_back(std::move(scores));
  }
  t.instance = {"inst", "rand", "ctx <|span|> ctx", gold.surface, gold.cluster, "d", "s", 0};
  return t;
}

inline void attach(FakeScorer& scorer, const RandomTable& t) {
  scorer.on_tokenize = [&t](std::string_view text, TokenizeMode) {
    TokenizeResponse r;
    r.token_ids = t.tokens.at(std::string(text));
    r.token_strings.assign(r.token_ids.size(), "x");
    return r;
  };
  scorer.on_fill = [&t](const ScoreRequest& req) {
    ScoreResponse out;
    for (int p = 0; p < req.num_masks; ++p) {
      PositionScores ps;
      for (TokenId id : req.candidate_ids) ps.candidate_logprobs.emplace_back(id, t.positions[p].at(id));
      out.positions.push_back(std::move(ps));
    }
    return out;
  };
}

// Reference rank: 1-based position of `gold` after sorting the candidates by
// (score descending, id ascending).
inline std::size_t full_sort_rank(TokenId gold, const std::set<TokenId>& candidates,
                                  const std::map<TokenId, double>& scores) {
  std::vector<std::pair<double, TokenId>> order;
  for (TokenId id : candidates) order.emplace_back(-scores.at(id), id);
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i].second == gold) return i + 1;
  }
  return 0;
}

struct ExpectedMetrics {
  std::vector<std::size_t> ranks;
  double mrr = 0.0;
  double p1 = 0.0;
  double strict_p1 = 0.0;
};

inline ExpectedMetrics expected_metrics(const RandomTable& t) {
  std::set<TokenId> candidates;
  for (const auto& [surface, ids] : t.tokens) candidates.insert(ids.begin(), ids.end());
  const auto& gold = t.tokens.at(t.instance.gold_surface);
  ExpectedMetrics m;
  double rr = 0.0;
  double firsts = 0.0;
  for (std::size_t p = 0; p < gold.size(); ++p) {
    m.ranks.push_back(full_sort_rank(gold[p], candidates, t.positions[p]));
    rr += 1.0 / static_cast<double>(m.ranks.back());
    firsts += m.ranks.back() == 1 ? 1.0 : 0.0;
  }
  m.mrr = rr / static_cast<double>(gold.size());
  m.p1 = firsts / static_cast<double>(gold.size());
  m.strict_p1 = firsts == static_cast<double>(gold.size()) ? 1.0 : 0.0;
  return m;
}

}  // namespace lexkit::testing
