#include <gtest/gtest.h>

#include <sstream>

#include "lexkit/error.hpp"
#include "lexkit/probes.hpp"
#include "lexkit/vocabulary.hpp"
#include "probe_oracle.hpp"
#include "test_support.hpp"

using namespace lexkit;
using namespace lexkit::testing;

namespace {

Corpus load(const std::filesystem::path& manifest) {
  return ingest(CorpusManifest::load(manifest));
}

std::vector<OracleInstance> as_oracle(const std::vector<ProbeInstance>& instances) {
  std::vector<OracleInstance> out;
  for (const auto& p : instances) out.push_back({p.instance_id, p.context, p.gold_surface});
  std::sort(out.begin(), out.end());
  return out;
}

ProbeBuildOptions uncapped() {
  ProbeBuildOptions o;
  o.max_per_label = 0;
  return o;
}

}  // namespace

TEST(TermMatching, LeftmostLongestResolvesOverlap) {
  const auto vocab = planted_vocabulary();
  const auto hits = find_term_occurrences("charged with drug trafficking and trafficking", vocab);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(vocab.labels()[hits[0].label].surface, "drug trafficking");
  EXPECT_EQ(vocab.labels()[hits[1].label].surface, "trafficking");
}

TEST(TermMatching, WholeWordsOnly) {
  const auto vocab = planted_vocabulary();
  EXPECT_TRUE(find_term_occurrences("thefts and frauds", vocab).empty());
  EXPECT_TRUE(find_term_occurrences("Article 60", vocab).empty());
  EXPECT_EQ(find_term_occurrences("(theft).", vocab).size(), 1u);
}

TEST(TermMatching, CaseInsensitivePolicy) {
  const auto ci = planted_vocabulary(MatchPolicy::case_insensitive);
  EXPECT_EQ(find_term_occurrences("Theft was alleged", ci).size(), 1u);
  EXPECT_TRUE(find_term_occurrences("Theft was alleged", planted_vocabulary()).empty());
}

TEST(ExcerptWindow, CutsOnWhitespaceAroundSpan) {
  const std::string text = "aaaa bbbb cccc TERM dddd eeee ffff";
  const auto b = text.find("TERM");
  const auto w = excerpt_window(text, b, b + 4, 16);
  ASSERT_TRUE(w);
  const auto excerpt = text.substr(w->first, w->second - w->first);
  EXPECT_LE(excerpt.size(), 16u);
  EXPECT_NE(excerpt.find("TERM"), std::string::npos);
  EXPECT_NE(excerpt.front(), ' ');
  EXPECT_NE(excerpt.back(), ' ');
  EXPECT_FALSE(excerpt_window(text, b, b + 4, 3));
}

TEST(ProbeBuilder, MatchesSubstringScanOracle) {
  TempDir dir;
  const auto subs = planted_corpus(300, 17);
  const auto vocab = planted_vocabulary();
  const auto result = build_probes(load(write_corpus(dir, subs)), vocab, uncapped());
  const auto expected = probe_oracle(subs, vocab);
  ASSERT_FALSE(expected.empty());
  EXPECT_EQ(as_oracle(result.instances), expected);
}

TEST(ProbeBuilder, MatchesOracleCaseInsensitive) {
  TempDir dir;
  const auto subs = planted_corpus(300, 23);
  const auto vocab = planted_vocabulary(MatchPolicy::case_insensitive);
  const auto result = build_probes(load(write_corpus(dir, subs)), vocab, uncapped());
  EXPECT_EQ(as_oracle(result.instances), probe_oracle(subs, vocab));
}

TEST(ProbeBuilder, RoundTripAndNoLeakage) {
  TempDir dir;
  const auto vocab = planted_vocabulary();
  const auto corpus = load(write_corpus(dir, planted_corpus(200, 5)));
  const auto result = build_probes(corpus, vocab, uncapped());
  const auto report = validate_probes(result.instances, vocab);
  EXPECT_TRUE(report.ok()) << report.to_json().dump(2);
  EXPECT_TRUE(check_source_round_trip(result.instances, corpus, vocab.match_policy()).empty());
  for (const auto& p : result.instances) {
    EXPECT_EQ(count_sentinels(p.context), 1u);
    EXPECT_EQ(count_surface(p.context, p.gold_surface, vocab.match_policy()), 0u);
  }
}

TEST(ProbeBuilder, TrainDocumentsNeverUsed) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"tr", "the theft occurred", "train"},
                                           {"te", "a fraud occurred", "test"}}}});
  const auto result = build_probes(load(m), planted_vocabulary(), {});
  ASSERT_EQ(result.instances.size(), 1u);
  EXPECT_EQ(result.instances[0].source_doc, "te");
  EXPECT_EQ(result.instances[0].context, "a <|span|> occurred");
  EXPECT_EQ(result.instances[0].instance_id, "planted:a:te:2");
}

TEST(ProbeBuilder, EmptyTestSplitIsAnError) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"tr", "theft", "train"}}}});
  EXPECT_THROW(build_probes(load(m), planted_vocabulary(), {}), ValidationError);
}

TEST(ProbeBuilder, MultiOccurrencePolicies) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"d", "theft and fraud\n\ntheft and theft", "test"}}}});
  const auto vocab = planted_vocabulary();
  ProbeBuildOptions o;
  o.multi = MultiOccurrencePolicy::skip_paragraph;
  EXPECT_TRUE(build_probes(load(m), vocab, o).instances.empty());
  o.multi = MultiOccurrencePolicy::skip_repeated_gold;
  const auto r = build_probes(load(m), vocab, o);
  ASSERT_EQ(r.instances.size(), 2u);
  EXPECT_EQ(r.instances[0].context, "<|span|> and fraud");
  EXPECT_EQ(r.instances[1].context, "theft and <|span|>");
}

TEST(ProbeBuilder, SentinelCollisionSkipsParagraph) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"d", "theft <|span|> here", "test"}}}});
  const auto r = build_probes(load(m), planted_vocabulary(), {});
  EXPECT_TRUE(r.instances.empty());
  EXPECT_EQ(r.skipped_other, 1u);
}

TEST(ProbeBuilder, CapIsSeededAndOrderIndependent) {
  TempDir dir;
  const auto subs = planted_corpus(400, 3);
  const auto corpus = load(write_corpus(dir, subs));
  const auto vocab = planted_vocabulary();
  ProbeBuildOptions o;
  o.max_per_label = 5;
  o.seed = 9;
  const auto a = build_probes(corpus, vocab, o);
  o.jobs = 3;
  const auto b = build_probes(corpus, vocab, o);
  EXPECT_EQ(as_oracle(a.instances), as_oracle(b.instances));
  for (const auto& c : a.coverage) EXPECT_LE(c.emitted, 5u);

  // The kept set is a subset of the uncapped set.
  const auto all = as_oracle(build_probes(corpus, vocab, uncapped()).instances);
  for (const auto& inst : as_oracle(a.instances)) {
    EXPECT_TRUE(std::binary_search(all.begin(), all.end(), inst));
  }
  o.seed = 10;
  EXPECT_NE(as_oracle(build_probes(corpus, vocab, o).instances), as_oracle(a.instances));
}

TEST(ProbeBuilder, OutputIsCanonicallyOrdered) {
  TempDir dir;
  const auto r = build_probes(load(write_corpus(dir, planted_corpus(200, 8))),
                              planted_vocabulary(), uncapped());
  std::vector<std::string> subs_seen;
  for (std::size_t i = 1; i < r.instances.size(); ++i) {
    const auto& p = r.instances[i - 1];
    const auto& q = r.instances[i];
    if (p.source_subcorpus == q.source_subcorpus && p.source_doc == q.source_doc) {
      EXPECT_LT(p.source_offset, q.source_offset);
    }
  }
}

TEST(ProbeBuilder, CoverageReportsUncoveredLabels) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"d", "only fraud here", "test"}}}});
  const auto r = build_probes(load(m), planted_vocabulary(), {});
  const auto uncovered = r.uncovered_labels();
  EXPECT_EQ(uncovered.size(), planted_vocabulary().labels().size() - 1);
  EXPECT_EQ(std::count(uncovered.begin(), uncovered.end(), "fraud"), 0);
}

TEST(ProbeIo, JsonlRoundTrip) {
  TempDir dir;
  const auto r = build_probes(load(write_corpus(dir, planted_corpus(50, 1))),
                              planted_vocabulary(), {});
  std::ostringstream out;
  write_probes(out, r.instances);
  write_file(dir / "p.jsonl", out.str());
  const auto back = read_probes(dir / "p.jsonl");
  ASSERT_EQ(back.size(), r.instances.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].to_json(), r.instances[i].to_json());
  }
}

TEST(ProbeValidation, FlagsBrokenInstances) {
  const auto vocab = planted_vocabulary();
  ProbeInstance p{"x", "planted", "no sentinel theft", "theft", "property", "", "", 0};
  ProbeInstance q{"x", "other", "<|span|>", "robbery", "property", "", "", 0};
  const auto report = validate_probes({p, q}, vocab);
  EXPECT_FALSE(report.ok());
  EXPECT_GE(report.violations.size(), 5u);
}

TEST(Vocabulary, JsonRoundTripAndValidation) {
  const auto vocab = planted_vocabulary(MatchPolicy::case_insensitive);
  const auto back = TermVocabulary::from_json(vocab.to_json());
  EXPECT_EQ(back.to_json(), vocab.to_json());
  EXPECT_EQ(back.clusters(), (std::vector<std::string>{"property", "drugs", "finance", "articles"}));
  EXPECT_THROW(TermVocabulary("t", {{"a", "c"}, {"a", "d"}}), ValidationError);
  EXPECT_THROW(TermVocabulary("", {{"a", "c"}}), ValidationError);
  EXPECT_THROW(TermVocabulary::from_json({{"task_id", "t"}}), ValidationError);
}

TEST(Vocabulary, BundledVocabulariesLoad) {
  const std::filesystem::path dir = std::filesystem::path(LEXKIT_SOURCE_DIR) / "data" / "vocab";
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto v = TermVocabulary::load(e.path());
    EXPECT_GE(v.labels().size(), 2u) << e.path();
    ++n;
  }
  EXPECT_EQ(n, 4u);
}
