#include <gtest/gtest.h>

#include <sstream>

#include "lexkit/cli.hpp"
#include "lexkit/run_header.hpp"
#include "test_support.hpp"

using namespace lexkit;
using namespace lexkit::testing;
using nlohmann::json;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lexkit");
  std::ostringstream out, err;
  CliResult r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<json> jsonl(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

const std::string kVocabDir = std::string(LEXKIT_SOURCE_DIR) + "/data/vocab/";

}  // namespace

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  const auto v = cli({"--version"});
  EXPECT_EQ(v.code, kExitOk);
  EXPECT_NE(v.out.find("0.1.0"), std::string::npos);
  EXPECT_EQ(cli({"build-probes", "--help"}).code, kExitOk);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, kExitValidation);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitValidation);
  const auto r = cli({"build-probes", "--vocab", "x.json"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("--manifest"), std::string::npos);
  EXPECT_EQ(cli({"sample", "--shares", "0.5,0.5", "--alpha", "2"}).code, kExitValidation);
  EXPECT_EQ(cli({"sample"}).code, kExitValidation);
}

TEST(Cli, MissingInputsExitTwo) {
  EXPECT_EQ(cli({"stats", "--manifest", "/nonexistent/manifest.json"}).code, kExitEnvironment);
}

TEST(Cli, UnreachableScorerExitsTwo) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"d", "He was charged with arson today.", "test"}}}});
  const auto probes = (dir / "p.jsonl").string();
  ASSERT_EQ(cli({"build-probes", "--manifest", m.string(), "--vocab",
                 kVocabDir + "crime_charges_us.json", "--out", probes})
                .code,
            kExitOk);
  const auto r = cli({"eval-probes", "--probes", probes, "--vocab",
                      kVocabDir + "crime_charges_us.json", "--scorer", "http://127.0.0.1:1"});
  EXPECT_EQ(r.code, kExitEnvironment) << r.err;
}

TEST(Cli, SampleWithAlphaOneReturnsShares) {
  const auto r = cli({"sample", "--shares", "0.5,0.3,0.2", "--alpha", "1.0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = jsonl(r.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0]["lexkit_header"]["subcommand"], "sample");
  const auto rates = lines[1]["plan"]["rates"].get<std::vector<double>>();
  EXPECT_NEAR(rates[0], 0.5, 1e-12);
  EXPECT_NEAR(rates[1], 0.3, 1e-12);
  EXPECT_NEAR(rates[2], 0.2, 1e-12);
}

TEST(Cli, SampleDrawsFromManifest) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"d1", "one two", "train"}}},
                                    {"b", {{"d2", "three four five", "train"}}}});
  const auto r = cli({"sample", "--manifest", m.string(), "--draws", "10", "--seed", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = jsonl(r.out);
  ASSERT_EQ(lines.size(), 13u);
  EXPECT_EQ(lines[1]["plan"]["subcorpora"], json({"a", "b"}));
  EXPECT_TRUE(lines.back().contains("wraps"));
  EXPECT_EQ(cli({"sample", "--manifest", m.string(), "--draws", "10", "--seed", "3"}).out, r.out);
}

TEST(Cli, StatsMarkdownAndJson) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"d1", "one two three", ""}}},
                                    {"b", {{"d2", "four", ""}}}});
  const auto md = cli({"stats", "--manifest", m.string(), "--alpha", "0.5"});
  ASSERT_EQ(md.code, kExitOk) << md.err;
  EXPECT_EQ(md.out.rfind("<!-- ", 0), 0u);
  EXPECT_NE(md.out.find("| a | 1 | 3 (75.0%) |"), std::string::npos) << md.out;
  const auto js = cli({"stats", "--manifest", m.string(), "--format", "json"});
  const auto doc = json::parse(js.out);
  EXPECT_EQ(doc.begin().key(), "lexkit_header");
  EXPECT_EQ(doc["stats"]["total_tokens"], 4);
}

TEST(Cli, TransferPlan) {
  TempDir dir;
  write_file(dir / "old.json", R"({"a":0,"b":1,"c":2})");
  write_file(dir / "new.json", R"({"b":0,"d":1})");
  const auto r = cli({"transfer-plan", "--old", (dir / "old.json").string(), "--new",
                      (dir / "new.json").string(), "--summary", (dir / "s.json").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = jsonl(r.out);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1]["action"], "copy_from");
  const auto summary = json::parse(read_file(dir / "s.json"));
  EXPECT_EQ(summary["summary"]["overlap_fraction"], 0.5);
  write_file(dir / "dup.json", R"({"a":0,"a":1})");
  EXPECT_EQ(cli({"transfer-plan", "--old", (dir / "dup.json").string(), "--new",
                 (dir / "new.json").string()})
                .code,
            kExitValidation);
}

TEST(Cli, ScorerFromEnvironment) {
  TempDir dir;
  const auto m = write_corpus(dir, {{"a", {{"d", "He was charged with arson today.", "test"}}}});
  const auto probes = (dir / "p.jsonl").string();
  ASSERT_EQ(cli({"build-probes", "--manifest", m.string(), "--vocab",
                 kVocabDir + "crime_charges_us.json", "--out", probes})
                .code,
            kExitOk);
  ::setenv("LEXKIT_SCORER_URL", "hash:seed=4", 1);
  const auto r = cli({"eval-probes", "--probes", probes, "--vocab",
                      kVocabDir + "crime_charges_us.json"});
  ::unsetenv("LEXKIT_SCORER_URL");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto lines = jsonl(r.out);
  EXPECT_EQ(lines[0]["lexkit_header"]["config"]["model_id"], "hash-s4-v1000");
  EXPECT_EQ(lines.size(), 2u);
  EXPECT_EQ(cli({"eval-probes", "--probes", probes, "--vocab",
                 kVocabDir + "crime_charges_us.json"})
                .code,
            kExitValidation);
}
