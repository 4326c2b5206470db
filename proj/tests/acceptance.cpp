// One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "lexkit/chunking.hpp"
#include "lexkit/evaluator.hpp"
#include "lexkit/probes.hpp"
#include "lexkit/report.hpp"
#include "lexkit/sampler.hpp"
#include "metric_oracle.hpp"
#include "pipeline.hpp"
#include "probe_oracle.hpp"
#include "test_support.hpp"

using namespace lexkit;
using namespace lexkit::testing;

namespace {

int failures = 0;

void verdict(bool pass, std::string_view name, const std::string& detail) {
  fmt::print("{} {}: {}\n", pass ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

void info(const std::string& detail) { fmt::print("     {}\n", detail); }

// Corpus statistics table: share column, token counts and the printed
// sampling column, in row order.
const std::vector<double> kShares{1.2, 0.9, 0.7, 1.9, 0.2, 0.2, 7.4, 59.2, 27.3, 0.4, 0.6};
const std::vector<double> kTokens{233.7e6, 178.5e6, 143.6e6, 368.4e6, 33.5e6, 33.1e6,
                                  1.4e9,   11.4e9,  5.3e9,   78.5e6,  111.6e6};
const std::vector<double> kPrinted{5.0, 4.3, 3.9, 6.2, 1.9, 1.8, 12.3, 34.7, 23.6, 2.9, 3.4};

double max_deviation_pp(const std::vector<double>& weights, double alpha) {
  const auto rates = smoothed_rates(weights, alpha).rates;
  double worst = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    worst = std::max(worst, std::abs(100.0 * rates[i] - kPrinted[i]));
  }
  return worst;
}

double grid_fit(const std::vector<double>& weights) {
  double best_alpha = 0.0;
  double best = INFINITY;
  for (int step = 0; step <= 100; ++step) {
    const double alpha = step / 100.0;
    const double dev = max_deviation_pp(weights, alpha);
    if (dev < best) {
      best = dev;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

void smoothing_reproduction() {
  const double dev = max_deviation_pp(kShares, 0.5);
  const double fit = grid_fit(kShares);
  verdict(dev <= 0.2 && std::abs(fit - 0.5) <= 0.05 + 1e-12, "smoothing reproduction",
          fmt::format("share column, alpha=0.5: max deviation {:.4f}pp (limit 0.2); "
                      "grid fit alpha={:.2f}",
                      dev, fit));
  info(fmt::format("token-count column, alpha=0.5: max deviation {:.4f}pp; grid fit alpha={:.2f}",
                   max_deviation_pp(kTokens, 0.5), grid_fit(kTokens)));
}

void sampler_convergence() {
  const auto plan = smoothed_rates(kShares, 0.5);
  std::vector<std::unique_ptr<ChunkSource>> sources;
  for (std::size_t i = 0; i < kShares.size(); ++i) {
    std::vector<std::string> units;
    for (std::size_t u = 0; u < 3 + i; ++u) units.push_back(fmt::format("s{}u{}", i, u));
    sources.push_back(std::make_unique<VectorChunkSource>(fmt::format("s{}", i), units));
  }
  SampleStream stream(std::move(sources), plan, 20230517);
  const std::size_t draws = 1'000'000;
  std::vector<std::size_t> counts(kShares.size(), 0);
  for (std::size_t i = 0; i < draws; ++i) ++counts[stream.next().source];
  double worst = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    worst = std::max(worst, std::abs(100.0 * counts[i] / draws - 100.0 * plan.rates[i]));
  }
  verdict(worst <= 0.3, "sampler convergence",
          fmt::format("1M draws over 11 streams, max deviation {:.4f}pp (limit 0.3)", worst));
}

void metric_oracle_and_arithmetic() {
  Rng rng(424242);
  std::size_t mismatches = 0;
  std::size_t p1_over_mrr = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto t = random_table(rng);
    FakeScorer scorer;
    attach(scorer, t);
    const TermVocabulary vocab("rand", t.labels);
    const auto cset = build_candidate_set(vocab, scorer);
    const auto got = eval_instance(t.instance, cset, scorer);
    const auto strict = eval_instance(t.instance, cset, scorer, true);
    const auto want = expected_metrics(t);
    if (got.ranks != want.ranks || got.instance_mrr != want.mrr || got.instance_p1 != want.p1 ||
        strict.instance_p1 != want.strict_p1) {
      ++mismatches;
    }
    if (got.instance_p1 > got.instance_mrr || strict.instance_p1 > strict.instance_mrr) {
      ++p1_over_mrr;
    }
  }
  verdict(mismatches == 0, "metric oracle equivalence",
          fmt::format("1000 random tables, {} mismatches against the full-sort oracle",
                      mismatches));

  InstanceResult two;
  two.ranks = {1, 2};
  finalize_instance(two, false);
  InstanceResult three;
  three.ranks = {1, 1, 1};
  finalize_instance(three, false);
  const bool ok = two.instance_mrr == 0.75 && two.instance_p1 == 0.5 &&
                  three.instance_mrr == 1.0 && three.instance_p1 == 1.0 && p1_over_mrr == 0;
  verdict(ok, "multi-token arithmetic",
          fmt::format("(1,2) -> {}/{}, (1,1,1) -> {}/{}, P@1 > MRR in {} runs", two.instance_mrr,
                      two.instance_p1, three.instance_mrr, three.instance_p1, p1_over_mrr));
}

InstanceResult synthetic_result(Rng& rng, std::size_t i, const TermVocabulary& vocab) {
  const auto& label = vocab.labels()[rng.below(vocab.labels().size())];
  InstanceResult r;
  r.instance_id = fmt::format("i{}", i);
  r.task_id = vocab.task_id();
  r.gold = label.surface;
  r.cluster = label.cluster;
  for (std::size_t k = 0; k <= rng.below(3); ++k) r.ranks.push_back(1 + rng.below(6));
  r.gold_ids.assign(r.ranks.size(), 4);
  finalize_instance(r, false);
  return r;
}

void macro_averaging() {
  const TermVocabulary vocab("m", {{"a", "x"}, {"b", "x"}, {"c", "y"}, {"d", "y"}, {"e", "z"}});
  Rng rng(7);
  std::size_t oracle_misses = 0;
  std::size_t dup_misses = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<InstanceResult> rs;
    const std::size_t n = 1 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) rs.push_back(synthetic_result(rng, i, vocab));

    std::map<std::string, std::pair<double, std::size_t>> groups;
    for (const auto& r : rs) {
      groups[r.gold].first += r.instance_mrr;
      ++groups[r.gold].second;
    }
    double oracle = 0.0;
    for (const auto& [label, g] : groups) oracle += g.first / g.second;
    oracle /= groups.size();
    const auto report = aggregate(rs, vocab);
    if (std::abs(report.macro_mrr - oracle) > 1e-12) ++oracle_misses;

    const std::string target = rs[rng.below(rs.size())].gold;
    for (std::size_t i = 0; i < n; ++i) {
      if (rs[i].gold == target) {
        auto copy = rs[i];
        copy.instance_id += "-dup";
        rs.push_back(copy);
      }
    }
    const auto dup = aggregate(rs, vocab);
    if (std::abs(dup.macro_mrr - report.macro_mrr) > 1e-12 ||
        std::abs(dup.macro_p1 - report.macro_p1) > 1e-12) {
      ++dup_misses;
    }
  }
  verdict(oracle_misses == 0 && dup_misses == 0, "macro-averaging",
          fmt::format("500 random tasks: {} group-by mismatches, {} duplication changes",
                      oracle_misses, dup_misses));
}

void model_ranking() {
  const std::vector<std::pair<std::string, double>> averages{
      {"RoBERTa-B", 70.1}, {"RoBERTa-L", 73.8}, {"LegalBERT", 78.7}, {"CL-BERT", 63.5},
      {"PoL-BERT", 68.9},  {"LexLM-B", 78.7},   {"LexLM-L", 81.8}};
  const std::vector<std::size_t> printed{5, 4, 2, 7, 6, 2, 1};
  std::map<std::string, std::size_t> by_model;
  for (const auto& m : rank_models(averages)) by_model[m.model_id] = m.rank;
  std::vector<std::size_t> got;
  for (const auto& [model, avg] : averages) got.push_back(by_model[model]);
  verdict(got == printed, "model ranking",
          fmt::format("ranks ({}) vs printed ({})", fmt::join(got, ", "), fmt::join(printed, ", ")));
}

void probe_builder_invariants() {
  TempDir dir;
  const auto subs = planted_corpus(1000, 20230517);
  const auto corpus = ingest(CorpusManifest::load(write_corpus(dir, subs)));
  const auto vocab = planted_vocabulary();
  ProbeBuildOptions options;
  options.max_per_label = 0;
  options.jobs = 3;
  const auto built = build_probes(corpus, vocab, options);

  std::vector<OracleInstance> got;
  for (const auto& p : built.instances) got.push_back({p.instance_id, p.context, p.gold_surface});
  std::sort(got.begin(), got.end());
  const auto expected = probe_oracle(subs, vocab);
  const auto round_trip = check_source_round_trip(built.instances, corpus, vocab.match_policy());
  const auto validation = validate_probes(built.instances, vocab);
  std::size_t leaks = 0;
  for (const auto& p : built.instances) {
    if (count_surface(p.context, p.gold_surface, vocab.match_policy()) > 0) ++leaks;
  }
  const bool ok = got == expected && round_trip.empty() && validation.ok() && leaks == 0 &&
                  !expected.empty();
  verdict(ok, "probe builder invariants",
          fmt::format("1000 planted documents: {} instances (oracle {}), {} round-trip failures, "
                      "{} leaks, {} validation violations",
                      got.size(), expected.size(), round_trip.size(), leaks,
                      validation.violations.size()));
}

void end_to_end_determinism() {
  TempDir a, b;
  const auto first = run_pipeline(a / "first", LEXKIT_SOURCE_DIR);
  const auto second = run_pipeline(b / "second", LEXKIT_SOURCE_DIR);
  std::size_t differing = 0;
  for (const auto& [name, content] : first.files) {
    const auto it = second.files.find(name);
    if (it == second.files.end() || it->second != content) ++differing;
  }
  const auto golden = std::filesystem::path(LEXKIT_SOURCE_DIR) / "tests" / "golden" /
                      "pipeline_digests.json";
  bool frozen_match = false;
  if (std::filesystem::exists(golden)) {
    frozen_match = nlohmann::json::parse(read_file(golden))
                       .get<std::map<std::string, std::string>>() == pipeline_digests(first);
  }
  const bool ok = first.ok && second.ok && differing == 0 &&
                  first.files.size() == second.files.size() && frozen_match;
  verdict(ok, "end-to-end determinism",
          fmt::format("{} outputs, {} differ between runs, frozen digests {}{}",
                      first.files.size(), differing, frozen_match ? "match" : "differ",
                      first.ok && second.ok ? "" : "; pipeline failed: " + first.log + second.log));
}

}  // namespace

int main() {
  smoothing_reproduction();
  sampler_convergence();
  metric_oracle_and_arithmetic();
  macro_averaging();
  model_ranking();
  probe_builder_invariants();
  end_to_end_determinism();
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
