#include <gtest/gtest.h>

#include <sstream>

#include "lexkit/error.hpp"
#include "lexkit/vocab_transfer.hpp"

using namespace lexkit;
using nlohmann::json;

TEST(TransferPlan, CopiesSharedTokens) {
  const TokenVocab old_vocab{{"a", 0}, {"b", 1}, {"c", 2}};
  const TokenVocab new_vocab{{"b", 0}, {"d", 1}};
  const auto plan = plan_embedding_transfer(old_vocab, new_vocab);
  ASSERT_EQ(plan.entries.size(), 2u);
  EXPECT_EQ(plan.entries[0], (TransferEntry{0, "b", 1}));
  EXPECT_EQ(plan.entries[1], (TransferEntry{1, "d", std::nullopt}));
  EXPECT_EQ(plan.summary.n_copied, 1u);
  EXPECT_EQ(plan.summary.n_random, 1u);
  EXPECT_DOUBLE_EQ(plan.summary.overlap_fraction, 0.5);
  EXPECT_EQ(plan.summary.old_size, 3u);
}

TEST(TransferPlan, MatchingIsByteExact) {
  const TokenVocab old_vocab{{"\xC4\xA0the", 5}, {"The", 6}};
  const TokenVocab new_vocab{{"the", 0}, {"\xC4\xA0the", 1}};
  const auto plan = plan_embedding_transfer(old_vocab, new_vocab);
  EXPECT_FALSE(plan.entries[0].copy_from);
  EXPECT_EQ(plan.entries[1].copy_from, 5);
}

TEST(TransferPlan, IdentityAndDisjoint) {
  TokenVocab v;
  for (int i = 0; i < 50; ++i) v["t" + std::to_string(i)] = i;
  const auto same = plan_embedding_transfer(v, v);
  EXPECT_DOUBLE_EQ(same.summary.overlap_fraction, 1.0);
  for (const auto& e : same.entries) EXPECT_EQ(e.copy_from, e.new_id);
  TokenVocab other;
  for (int i = 0; i < 10; ++i) other["u" + std::to_string(i)] = i;
  EXPECT_EQ(plan_embedding_transfer(v, other).summary.n_copied, 0u);
}

TEST(TransferPlan, JsonlOutput) {
  const auto plan = plan_embedding_transfer({{"a", 0}, {"b", 1}}, {{"b", 0}, {"z", 1}});
  std::ostringstream out;
  write_plan(out, plan);
  std::istringstream in(out.str());
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  EXPECT_EQ(json::parse(l1), json::parse(R"({"new_id":0,"token":"b","action":"copy_from","old_id":1})"));
  EXPECT_EQ(json::parse(l2)["action"], "random_init");
}

TEST(TokenVocabParsing, FlatAndTokenizerLayouts) {
  EXPECT_EQ(parse_token_vocab(R"({"a":0,"b":1})").size(), 2u);
  const auto v = parse_token_vocab(R"({"version":"1.0","model":{"type":"BPE","vocab":{"x":3,"y":4}}})");
  EXPECT_EQ(v.at("y"), 4);
}

TEST(TokenVocabParsing, RejectsBadInput) {
  EXPECT_THROW(parse_token_vocab(R"({"a":0,"a":1})"), ValidationError);
  EXPECT_THROW(parse_token_vocab(R"({"a":0,"b":0})"), ValidationError);
  EXPECT_THROW(parse_token_vocab(R"({"a":-1})"), ValidationError);
  EXPECT_THROW(parse_token_vocab(R"({"a":"1"})"), ValidationError);
  EXPECT_THROW(parse_token_vocab(R"({"a":1.5})"), ValidationError);
  EXPECT_THROW(parse_token_vocab("[1,2]"), ValidationError);
  EXPECT_THROW(parse_token_vocab("{"), ValidationError);
  EXPECT_THROW(load_token_vocab("/nonexistent/vocab.json"), IoError);
}
