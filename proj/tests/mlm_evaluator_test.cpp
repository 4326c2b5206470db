#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lexkit/error.hpp"
#include "lexkit/mlm_evaluator.hpp"
#include "lexkit/mock_scorers.hpp"
#include "lexkit/text.hpp"
#include "test_support.hpp"

using namespace lexkit;
using namespace lexkit::testing;

namespace {

// Tokens are whitespace words mapped to 10 + word length; id 1 is special.
FakeScorer word_scorer(int offset) {
  FakeScorer s;
  s.info_value.special_ids = {1};
  s.on_tokenize = [](std::string_view text, TokenizeMode) {
    TokenizeResponse r;
    for (auto w : whitespace_tokens(text)) {
      r.token_ids.push_back(w == "SPECIAL" ? 1 : 10 + static_cast<TokenId>(w.size()));
      r.token_strings.emplace_back(w);
    }
    return r;
  };
  s.on_fill_ids = [offset](const IdFillRequest& req) {
    ScoreResponse out;
    for (std::size_t p : req.mask_positions) {
      PositionScores ps;
      ps.topk = {{req.token_ids[p] + offset, -0.1}};
      out.positions.push_back(ps);
    }
    return out;
  };
  return s;
}

Corpus small_corpus(const TempDir& dir) {
  std::vector<FixtureDoc> a, b;
  for (int i = 0; i < 12; ++i) {
    a.push_back({"a" + std::to_string(i), "the quick brown fox jumps over SPECIAL lazy dogs", "test"});
    b.push_back({"b" + std::to_string(i), "lorem ipsum dolor sit amet consectetur", i % 2 ? "test" : "train"});
  }
  return ingest(CorpusManifest::load(write_corpus(dir, {{"a", a}, {"b", b}, {"c", {}}})));
}

}  // namespace

TEST(MaskedCount, CeilingWithFloorOfOne) {
  EXPECT_EQ(masked_count(1, 0.15), 1u);
  EXPECT_EQ(masked_count(20, 0.15), 3u);
  EXPECT_EQ(masked_count(100, 0.15), 15u);
  EXPECT_EQ(masked_count(101, 0.15), 16u);
  EXPECT_EQ(masked_count(10, 1.0), 10u);
}

TEST(MaskPositions, DistinctSortedAndSeeded) {
  std::vector<std::size_t> eligible{0, 2, 3, 5, 8, 9, 11};
  const auto a = choose_mask_positions(eligible, 4, 7);
  EXPECT_EQ(a.size(), 4u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  for (auto p : a) EXPECT_NE(std::find(eligible.begin(), eligible.end(), p), eligible.end());
  EXPECT_EQ(choose_mask_positions(eligible, 4, 7), a);
}

TEST(MaskPositions, UniformOverPositions) {
  std::vector<std::size_t> eligible(10);
  std::iota(eligible.begin(), eligible.end(), 0);
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    for (auto p : choose_mask_positions(eligible, 3, static_cast<std::uint64_t>(t))) ++hits[p];
  }
  const double expected = trials * 3 / 10.0;
  double chi2 = 0.0;
  for (int h : hits) chi2 += (h - expected) * (h - expected) / expected;
  EXPECT_LT(chi2, 27.88);  // p = 0.001, 9 dof
}

TEST(EvalMlm, OracleScorerIsPerfectAndWrongScorerIsZero) {
  TempDir dir;
  const auto corpus = small_corpus(dir);
  auto oracle = word_scorer(0);
  const auto good = eval_mlm(corpus, {.mask_rate = 0.3, .seed = 1}, oracle);
  ASSERT_EQ(good.subcorpora.size(), 3u);
  EXPECT_EQ(good.subcorpora[0].chunks, 12u);
  EXPECT_EQ(good.subcorpora[1].chunks, 6u);
  EXPECT_EQ(good.subcorpora[2].masked, 0u);
  EXPECT_DOUBLE_EQ(good.subcorpora[0].accuracy(), 1.0);
  EXPECT_DOUBLE_EQ(good.average(), 1.0);
  // 8 eligible words, ceil(0.3 * 8) = 3 masked per chunk.
  EXPECT_EQ(good.subcorpora[0].masked, 12u * 3u);

  auto wrong = word_scorer(1);
  EXPECT_DOUBLE_EQ(eval_mlm(corpus, {.mask_rate = 0.3, .seed = 1}, wrong).average(), 0.0);
}

TEST(EvalMlm, SpecialTokensAreNeverMasked) {
  TempDir dir;
  const auto corpus = small_corpus(dir);
  auto s = word_scorer(0);
  s.on_fill_ids = [](const IdFillRequest& req) {
    ScoreResponse out;
    for (std::size_t p : req.mask_positions) {
      if (req.token_ids[p] == 1) throw ProtocolError("masked a special token");
      out.positions.push_back({{}, {{req.token_ids[p], 0.0}}});
    }
    return out;
  };
  EXPECT_NO_THROW(eval_mlm(corpus, {.mask_rate = 0.99}, s));
}

TEST(EvalMlm, DeterministicAcrossJobs) {
  TempDir dir;
  const auto corpus = small_corpus(dir);
  HashScorer s({.seed = 2, .vocab_size = 50});
  const auto a = eval_mlm(corpus, {.seed = 4, .jobs = 1}, s);
  const auto b = eval_mlm(corpus, {.seed = 4, .jobs = 3}, s);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.to_markdown(), b.to_markdown());
}

TEST(EvalMlm, ChunkCapAndTruncationFlag) {
  TempDir dir;
  const auto corpus = small_corpus(dir);
  auto s = word_scorer(0);
  const auto r = eval_mlm(corpus, {.max_chunks = 4, .token_budget = 5}, s);
  EXPECT_EQ(r.subcorpora[0].chunks, 4u);
  EXPECT_EQ(r.subcorpora[0].truncated_chunks, 4u);
  EXPECT_EQ(r.subcorpora[1].truncated_chunks, 4u);
}

TEST(EvalMlm, ConfigValidation) {
  EXPECT_THROW(MlmEvalConfig{.mask_rate = 0.0}.validate(), ValidationError);
  EXPECT_THROW(MlmEvalConfig{.mask_rate = 1.5}.validate(), ValidationError);
}

TEST(MlmReport, AverageSkipsEmptySubcorpora) {
  MlmReport r;
  r.subcorpora = {{"a", 1, 0, 10, 5}, {"b", 1, 0, 4, 4}, {"c", 0, 0, 0, 0}};
  EXPECT_DOUBLE_EQ(r.average(), 0.75);
  EXPECT_NE(r.to_markdown().find("| a |"), std::string::npos);
}
