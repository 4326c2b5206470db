#include "lexkit/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lexkit/chunking.hpp"
#include "lexkit/corpus.hpp"
#include "lexkit/error.hpp"
#include "lexkit/evaluator.hpp"
#include "lexkit/mlm_evaluator.hpp"
#include "lexkit/mock_scorers.hpp"
#include "lexkit/probes.hpp"
#include "lexkit/remote_scorer.hpp"
#include "lexkit/report.hpp"
#include "lexkit/run_header.hpp"
#include "lexkit/sampler.hpp"
#include "lexkit/scorer_service.hpp"
#include "lexkit/vocab_transfer.hpp"

namespace lexkit {

using nlohmann::json;

namespace {

std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string default_scorer() {
  const char* env = std::getenv("LEXKIT_SCORER_URL");
  return env ? env : "";
}

// Writes to a file, or to the CLI's stdout for "-".
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    out.flush();
  } else {
    write_file(path, content);
  }
}

std::string jsonl_header(const RunHeader& h) {
  std::ostringstream s;
  write_jsonl_header(s, h);
  return s.str();
}

// JSON documents carry the header as their first key.
std::string json_document(const RunHeader& h, json body) {
  json doc = json::object();
  doc[std::string(kHeaderKey)] = h.to_json();
  for (auto& [k, v] : body.items()) doc[k] = std::move(v);
  return doc.dump(2) + "\n";
}

template <typename T>
T parse_enum(const std::optional<T>& parsed, std::string_view flag, std::string_view value) {
  if (!parsed) throw ValidationError(fmt::format("invalid value '{}' for {}", value, flag));
  return *parsed;
}

struct CorpusFlags {
  std::string manifest;
  double test_fraction = 0.1;
  std::uint64_t split_seed = 0;
  bool strict = false;

  void add(CLI::App* cmd, bool splits) {
    cmd->add_option("--manifest", manifest, "Corpus manifest (JSON)")->required();
    cmd->add_flag("--strict", strict, "Treat malformed input lines as fatal");
    if (splits) {
      cmd->add_option("--test-fraction", test_fraction,
                      "Test share for documents without an explicit split")
          ->capture_default_str();
      cmd->add_option("--split-seed", split_seed, "Seed of the train/test assignment")
          ->capture_default_str();
    }
  }

  Corpus open(bool splits) const {
    IngestOptions opts;
    opts.strict = strict;
    Corpus corpus = ingest(CorpusManifest::load(manifest), opts);
    return splits ? assign_splits(corpus, test_fraction, split_seed) : corpus;
  }

  json describe(bool splits) const {
    json inputs = json::array();
    const auto m = CorpusManifest::load(manifest);
    for (const auto& e : m.entries) {
      json d = describe_input(e.path);
      d["subcorpus_id"] = e.subcorpus_id;
      inputs.push_back(std::move(d));
    }
    json out = {{"manifest", describe_input(manifest)}, {"subcorpora", inputs}, {"strict", strict}};
    if (splits) {
      out["test_fraction"] = test_fraction;
      out["split_seed"] = split_seed;
    }
    return out;
  }
};

void print_diagnostics(const IngestDiagnostics& d, std::ostream& err) {
  if (d.malformed == 0) return;
  err << fmt::format("warning: skipped {} malformed line(s)\n", d.malformed);
  for (const auto& w : d.warnings) err << "  " << w << '\n';
}

// ---------------------------------------------------------------------------

struct StatsCmd {
  CorpusFlags corpus;
  std::string format = "markdown";
  std::optional<double> alpha;
  std::string out = "-";
  std::size_t jobs = default_jobs();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("stats", "Per-sub-corpus document and token statistics");
    corpus.add(cmd, false);
    cmd->add_option("--format", format, "markdown or json")->capture_default_str();
    cmd->add_option("--alpha", alpha, "Add a smoothed sampling column with this exponent");
    cmd->add_option("--out", out, "Output path, - for stdout")->capture_default_str();
    cmd->add_option("--jobs", jobs, "Worker threads");
  }

  int run(std::ostream& o, std::ostream& err) const {
    const auto fmt_kind = parse_enum(parse_report_format(format), "--format", format);
    if (fmt_kind == ReportFormat::csv) throw ValidationError("stats supports markdown or json");
    const Corpus c = corpus.open(false);
    IngestDiagnostics diag;
    const CorpusStats stats = compute_stats(c, jobs, &diag);
    print_diagnostics(diag, err);

    std::optional<std::vector<double>> rates;
    if (alpha) {
      if (!stats.shares_defined) throw ValidationError("corpus has no tokens; shares undefined");
      const auto w = stats.shares();
      rates = smoothed_rates(w, *alpha).rates;
    }
    RunHeader h{"stats", 0, {{"inputs", corpus.describe(false)}, {"format", format}}};
    if (alpha) h.config["alpha"] = *alpha;
    const auto* r = rates ? &*rates : nullptr;
    if (fmt_kind == ReportFormat::json) {
      emit(out, json_document(h, {{"stats", stats_to_json(stats, r, alpha)}}), o);
    } else {
      emit(out, markdown_header(h) + stats_to_markdown(stats, r), o);
    }
    return kExitOk;
  }
};

struct SampleCmd {
  std::string manifest;
  std::vector<double> shares;
  double alpha = kDefaultAlpha;
  std::size_t draws = 0;
  std::string unit = "chunk";
  std::size_t window = 1000;
  std::string split = "train";
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  std::uint64_t split_seed = 0;
  std::string out = "-";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("sample", "Smoothed sub-corpus sampling plan and draws");
    auto* m = cmd->add_option("--manifest", manifest, "Corpus manifest (JSON)");
    auto* s = cmd->add_option("--shares", shares, "Explicit shares instead of a corpus")
                  ->delimiter(',');
    m->excludes(s);
    cmd->add_option("--alpha", alpha, "Smoothing exponent in [0, 1]")->capture_default_str();
    cmd->add_option("--draws", draws, "Number of units to draw (needs --manifest)");
    cmd->add_option("--unit", unit, "document, chunk or sentence")->capture_default_str();
    cmd->add_option("--window", window, "Chunk size in characters")->capture_default_str();
    cmd->add_option("--split", split, "train, test or any")->capture_default_str();
    cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();
    cmd->add_option("--test-fraction", test_fraction)->capture_default_str();
    cmd->add_option("--split-seed", split_seed)->capture_default_str();
    cmd->add_option("--out", out, "Output path, - for stdout")->capture_default_str();
  }

  int run(std::ostream& o, std::ostream& err) const {
    if (manifest.empty() && shares.empty()) {
      throw ValidationError("sample needs --manifest or --shares");
    }
    ChunkOptions copts;
    copts.window_chars = window;
    copts.unit = parse_enum(parse_sampling_unit(unit), "--unit", unit);
    copts.filter = parse_enum(parse_split_filter(split), "--split", split);

    RunHeader h{"sample", seed, {{"alpha", alpha}, {"draws", draws}}};
    SamplingPlan plan;
    std::optional<Corpus> corpus;
    if (!shares.empty()) {
      if (draws > 0) throw ValidationError("--draws needs --manifest");
      plan = smoothed_rates(shares, alpha);
      h.config["shares"] = shares;
    } else {
      CorpusFlags cf{manifest, test_fraction, split_seed, false};
      corpus = cf.open(true);
      IngestDiagnostics diag;
      const auto stats = compute_stats(*corpus, 1, &diag);
      print_diagnostics(diag, err);
      if (!stats.shares_defined) throw ValidationError("corpus has no tokens; shares undefined");
      std::vector<double> weights;
      for (const auto& s : stats.subcorpora) weights.push_back(static_cast<double>(s.token_count));
      plan = smoothed_rates(weights, alpha);
      for (const auto& s : stats.subcorpora) plan.subcorpus_ids.push_back(s.subcorpus_id);
      h.config["inputs"] = cf.describe(true);
      h.config["unit"] = unit;
      h.config["window"] = window;
      h.config["split"] = split;
    }

    std::string body = jsonl_header(h) + json{{"plan", plan.to_json()}}.dump() + "\n";
    if (draws > 0) {
      SampleStream stream(open_chunk_streams(*corpus, copts), plan, seed);
      for (std::size_t i = 0; i < draws; ++i) {
        auto d = stream.next();
        body += json{{"draw", i},
                     {"subcorpus_id", d.chunk.subcorpus_id},
                     {"doc_id", d.chunk.doc_id},
                     {"index", d.chunk.index},
                     {"text", d.chunk.text}}
                    .dump() +
                "\n";
      }
      body += json{{"wraps", stream.wraps()}}.dump() + "\n";
    }
    emit(out, body, o);
    return kExitOk;
  }
};

struct BuildProbesCmd {
  CorpusFlags corpus;
  std::string vocab;
  std::string out = "-";
  std::size_t window = 2000;
  std::size_t max_per_label = 200;
  std::uint64_t seed = 0;
  std::string multi = "skip-paragraph";
  std::string coverage;
  std::size_t jobs = default_jobs();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("build-probes", "Extract cloze probes from the test split");
    corpus.add(cmd, true);
    cmd->add_option("--vocab", vocab, "Task vocabulary (JSON)")->required();
    cmd->add_option("--out", out, "Probe JSONL path, - for stdout")->capture_default_str();
    cmd->add_option("--window", window, "Excerpt size in characters")->capture_default_str();
    cmd->add_option("--max-per-label", max_per_label, "Instance cap per label, 0 for none")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "Seed of the per-label cap")->capture_default_str();
    cmd->add_option("--multi", multi, "skip-paragraph or skip-repeated-gold")
        ->capture_default_str();
    cmd->add_option("--coverage", coverage, "Write per-label coverage JSON here");
    cmd->add_option("--jobs", jobs, "Worker threads");
  }

  int run(std::ostream& o, std::ostream& err) const {
    ProbeBuildOptions opts;
    opts.window_chars = window;
    opts.max_per_label = max_per_label;
    opts.seed = seed;
    opts.jobs = jobs;
    if (multi == "skip-paragraph") {
      opts.multi = MultiOccurrencePolicy::skip_paragraph;
    } else if (multi == "skip-repeated-gold") {
      opts.multi = MultiOccurrencePolicy::skip_repeated_gold;
    } else {
      throw ValidationError(fmt::format("invalid value '{}' for --multi", multi));
    }
    const auto v = TermVocabulary::load(vocab);
    const Corpus c = corpus.open(true);
    const auto result = build_probes(c, v, opts);
    print_diagnostics(result.diagnostics, err);

    const auto report = validate_probes(result.instances, v);
    if (!report.ok()) {
      throw ValidationError(fmt::format("probe validation failed: {} ({})",
                                        report.violations.front().message,
                                        report.violations.front().instance_id));
    }
    const auto uncovered = result.uncovered_labels();
    if (!uncovered.empty()) {
      err << fmt::format("warning: {} label(s) without instances:", uncovered.size());
      for (const auto& l : uncovered) err << " '" << l << "'";
      err << '\n';
    }
    err << fmt::format("{} instances over {} labels from {} test documents\n",
                       result.instances.size(), v.labels().size(), result.test_documents);

    RunHeader h{"build-probes", seed,
                {{"inputs", corpus.describe(true)},
                 {"vocab", describe_input(vocab)},
                 {"task_id", v.task_id()},
                 {"window", window},
                 {"max_per_label", max_per_label},
                 {"multi", multi}}};
    std::ostringstream body;
    write_jsonl_header(body, h);
    write_probes(body, result.instances);
    emit(out, body.str(), o);
    if (!coverage.empty()) {
      json cov = result.coverage_json();
      cov["validation"] = report.to_json();
      emit(coverage, json_document(h, cov), o);
    }
    return kExitOk;
  }
};

struct EvalProbesCmd {
  std::string probes;
  std::string vocab;
  std::string scorer = default_scorer();
  std::string out = "-";
  std::string candidates;
  bool strict_p1 = false;
  std::size_t jobs = default_jobs();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-probes", "Rank gold sub-tokens within the label set");
    cmd->add_option("--probes", probes, "Probe JSONL")->required();
    cmd->add_option("--vocab", vocab, "Task vocabulary (JSON)")->required();
    cmd->add_option("--scorer", scorer, "Scorer endpoint (default $LEXKIT_SCORER_URL)");
    cmd->add_option("--out", out, "Results JSONL path, - for stdout")->capture_default_str();
    cmd->add_option("--candidates", candidates,
                    "Candidate-set cache: loaded when present, written otherwise");
    cmd->add_flag("--strict-p1", strict_p1, "P@1 counts only when every sub-token ranks first");
    cmd->add_option("--jobs", jobs, "Concurrent requests");
  }

  int run(std::ostream& o, std::ostream& err) const {
    if (scorer.empty()) throw ValidationError("no scorer: pass --scorer or set LEXKIT_SCORER_URL");
    const auto v = TermVocabulary::load(vocab);
    const auto instances = read_probes(probes);
    auto s = make_scorer(scorer);
    CandidateSet cset;
    if (!candidates.empty() && std::filesystem::exists(candidates)) {
      cset = load_candidate_set(candidates, v, *s);
    } else {
      cset = build_candidate_set(v, *s);
      if (!candidates.empty()) write_file(candidates, cset.to_json().dump(2) + "\n");
    }
    EvalOptions opts;
    opts.strict_p1 = strict_p1;
    opts.jobs = jobs;
    const auto evaluation = eval_task(instances, cset, *s, opts);

    const auto summary = evaluation.summary_json();
    err << fmt::format("evaluated {}, skipped {}, errored {}\n", evaluation.evaluated,
                       evaluation.skipped, evaluation.errored.size());
    for (const auto& e : evaluation.errored) {
      err << fmt::format("  {}: {}\n", e.instance_id, e.message);
    }
    RunHeader h{"eval-probes", 0,
                {{"probes", describe_input(probes)},
                 {"vocab", describe_input(vocab)},
                 {"task_id", v.task_id()},
                 {"scorer", describe_endpoint(scorer)},
                 {"model_id", cset.model_id},
                 {"candidate_ids", cset.ids.size()},
                 {"strict_p1", strict_p1}}};
    std::ostringstream body;
    write_jsonl_header(body, h);
    write_results(body, evaluation);
    emit(out, body.str(), o);
    return kExitOk;
  }
};

struct EvalMlmCmd {
  CorpusFlags corpus;
  std::string scorer = default_scorer();
  double rate = 0.15;
  std::uint64_t seed = 0;
  std::size_t max_chunks = 100;
  std::size_t window = 1000;
  std::size_t token_budget = 0;
  std::string format = "json";
  std::string out = "-";
  std::size_t jobs = default_jobs();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-mlm", "Masked-token accuracy per sub-corpus");
    corpus.add(cmd, true);
    cmd->add_option("--scorer", scorer, "Scorer endpoint (default $LEXKIT_SCORER_URL)");
    cmd->add_option("--rate", rate, "Mask rate in (0, 1)")->capture_default_str();
    cmd->add_option("--seed", seed, "Chunk sampling and masking seed")->capture_default_str();
    cmd->add_option("--max-chunks", max_chunks, "Chunks per sub-corpus, 0 for all")
        ->capture_default_str();
    cmd->add_option("--window", window, "Chunk size in characters")->capture_default_str();
    cmd->add_option("--token-budget", token_budget,
                    "Tokens kept per chunk, 0 for the scorer limit");
    cmd->add_option("--format", format, "json or markdown")->capture_default_str();
    cmd->add_option("--out", out, "Output path, - for stdout")->capture_default_str();
    cmd->add_option("--jobs", jobs, "Concurrent requests");
  }

  int run(std::ostream& o, std::ostream&) const {
    if (scorer.empty()) throw ValidationError("no scorer: pass --scorer or set LEXKIT_SCORER_URL");
    const auto fmt_kind = parse_enum(parse_report_format(format), "--format", format);
    if (fmt_kind == ReportFormat::csv) throw ValidationError("eval-mlm supports json or markdown");
    MlmEvalConfig config;
    config.mask_rate = rate;
    config.seed = seed;
    config.max_chunks = max_chunks;
    config.window_chars = window;
    config.token_budget = token_budget;
    config.jobs = jobs;
    config.validate();
    auto s = make_scorer(scorer);
    const auto report = eval_mlm(corpus.open(true), config, *s);
    RunHeader h{"eval-mlm", seed,
                {{"inputs", corpus.describe(true)},
                 {"scorer", describe_endpoint(scorer)},
                 {"mlm", config.to_json()}}};
    if (fmt_kind == ReportFormat::json) {
      emit(out, json_document(h, {{"mlm", report.to_json()}}), o);
    } else {
      emit(out, markdown_header(h) + report.to_markdown(), o);
    }
    return kExitOk;
  }
};

struct ReportCmd {
  std::vector<std::string> results;
  std::vector<std::string> vocabs;
  std::string format = "markdown";
  bool weighted_clusters = false;
  std::string curve;
  std::string out = "-";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("report", "Macro-averaged task reports and model ranking");
    cmd->add_option("--results", results, "Results JSONL (repeatable)")->required();
    cmd->add_option("--vocab", vocabs, "Task vocabulary JSON (repeatable)")->required();
    cmd->add_option("--format", format, "markdown, json or csv")->capture_default_str();
    cmd->add_flag("--weighted-clusters", weighted_clusters,
                  "Cluster means over instances instead of labels");
    cmd->add_option("--curve", curve, "Write the label-complexity curve CSV here");
    cmd->add_option("--out", out, "Output path, - for stdout")->capture_default_str();
  }

  int run(std::ostream& o, std::ostream& err) const {
    const auto fmt_kind = parse_enum(parse_report_format(format), "--format", format);
    std::map<std::string, TermVocabulary> by_task;
    json vocab_inputs = json::array();
    for (const auto& path : vocabs) {
      auto v = TermVocabulary::load(path);
      vocab_inputs.push_back(describe_input(path));
      const std::string id = v.task_id();
      if (!by_task.emplace(id, std::move(v)).second) {
        throw ValidationError(fmt::format("two vocabularies for task {}", id));
      }
    }
    std::vector<TaskReport> reports;
    std::vector<InstanceResult> all;
    json result_inputs = json::array();
    for (const auto& path : results) {
      const auto header = read_jsonl_header(path);
      auto rs = read_results(path);
      if (rs.empty()) throw ValidationError(fmt::format("{} holds no results", path));
      std::string task = rs.front().task_id;
      std::string model;
      if (header) {
        const auto& cfg = (*header)["config"];
        model = cfg.value("model_id", "");
        if (task.empty()) task = cfg.value("task_id", "");
      }
      const auto it = by_task.find(task);
      if (it == by_task.end()) {
        if (by_task.size() != 1) {
          throw ValidationError(fmt::format("no --vocab given for task '{}' of {}", task, path));
        }
      }
      const auto& v = it != by_task.end() ? it->second : by_task.begin()->second;
      AggregateOptions opts;
      opts.weighted_clusters = weighted_clusters;
      opts.model_id = model;
      reports.push_back(aggregate(rs, v, opts));
      if (!reports.back().zero_instance_labels.empty()) {
        err << fmt::format("note: {} label(s) of {} have no instances\n",
                           reports.back().zero_instance_labels.size(), v.task_id());
      }
      result_inputs.push_back(describe_input(path));
      all.insert(all.end(), rs.begin(), rs.end());
    }

    RunHeader h{"report", 0,
                {{"results", result_inputs},
                 {"vocabs", vocab_inputs},
                 {"format", format},
                 {"weighted_clusters", weighted_clusters}}};
    std::string body = reports.size() == 1 ? render(reports.front(), fmt_kind)
                                           : render_leaderboard(reports, fmt_kind);
    switch (fmt_kind) {
      case ReportFormat::json:
        emit(out, json_document(h, {{"report", json::parse(body)}}), o);
        break;
      case ReportFormat::csv:
        emit(out, csv_header(h) + body, o);
        break;
      case ReportFormat::markdown:
        emit(out, markdown_header(h) + body, o);
        break;
    }
    if (!curve.empty()) emit(curve, csv_header(h) + curve_to_csv(complexity_curve(all)), o);
    return kExitOk;
  }
};

struct TransferCmd {
  std::string old_vocab;
  std::string new_vocab;
  std::string out = "-";
  std::string summary;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("transfer-plan", "Embedding reuse plan between vocabularies");
    cmd->add_option("--old", old_vocab, "Old vocabulary (token -> id JSON)")->required();
    cmd->add_option("--new", new_vocab, "New vocabulary (token -> id JSON)")->required();
    cmd->add_option("--out", out, "Plan JSONL path, - for stdout")->capture_default_str();
    cmd->add_option("--summary", summary, "Write the summary JSON here");
  }

  int run(std::ostream& o, std::ostream& err) const {
    const auto plan =
        plan_embedding_transfer(load_token_vocab(old_vocab), load_token_vocab(new_vocab));
    RunHeader h{"transfer-plan", 0,
                {{"old", describe_input(old_vocab)}, {"new", describe_input(new_vocab)}}};
    std::ostringstream body;
    write_jsonl_header(body, h);
    write_plan(body, plan);
    emit(out, body.str(), o);
    const auto s = plan.summary.to_json();
    if (summary.empty()) {
      err << s.dump() << '\n';
    } else {
      emit(summary, json_document(h, {{"summary", s}}), o);
    }
    return kExitOk;
  }
};

struct ServeCmd {
  std::string kind = "hash";
  std::uint64_t seed = 0;
  std::int64_t vocab_size = 1000;
  std::int64_t max_tokens = 512;
  std::string table;
  bool stdio = false;
  std::string host = "127.0.0.1";
  int port = 8765;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("serve", "Serve a built-in mock scorer over HTTP or stdio");
    cmd->add_option("--kind", kind, "hash or table")->capture_default_str();
    cmd->add_option("--seed", seed, "Hash scorer seed")->capture_default_str();
    cmd->add_option("--vocab-size", vocab_size, "Hash scorer vocabulary")->capture_default_str();
    cmd->add_option("--max-tokens", max_tokens, "Input limit")->capture_default_str();
    cmd->add_option("--table", table, "Table scorer config (JSON)");
    cmd->add_flag("--stdio", stdio, "Speak the line-delimited stdio framing");
    cmd->add_option("--host", host)->capture_default_str();
    cmd->add_option("--port", port)->capture_default_str();
  }

  int run(std::ostream& o, std::ostream& err) const {
    std::unique_ptr<Scorer> scorer;
    if (kind == "hash") {
      HashScorerConfig c;
      c.seed = seed;
      c.vocab_size = vocab_size;
      c.max_input_tokens = max_tokens;
      scorer = std::make_unique<HashScorer>(c);
    } else if (kind == "table") {
      if (table.empty()) throw ValidationError("--kind table needs --table");
      scorer = std::make_unique<TableScorer>(TableScorerConfig::load(table));
    } else {
      throw ValidationError(fmt::format("invalid value '{}' for --kind", kind));
    }
    if (stdio) {
      serve_stdio(*scorer, std::cin, o);
      return kExitOk;
    }
    HttpScorerServer server(*scorer);
    err << fmt::format("serving {} on http://{}:{}\n", scorer->info().model_id, host, port);
    if (!server.listen(host, port)) {
      throw IoError(fmt::format("cannot listen on {}:{}", host, port));
    }
    return kExitOk;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lexkit: legal-corpus sampling, cloze probing and masked-LM evaluation", "lexkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  StatsCmd stats;
  SampleCmd sample;
  BuildProbesCmd build;
  EvalProbesCmd eval_probes;
  EvalMlmCmd eval_mlm_cmd;
  ReportCmd report;
  TransferCmd transfer;
  ServeCmd serve;
  stats.add(app);
  sample.add(app);
  build.add(app);
  eval_probes.add(app);
  eval_mlm_cmd.add(app);
  report.add(app);
  transfer.add(app);
  serve.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n";
    const auto sub = app.get_subcommands();
    err << (sub.empty() ? app.help() : sub.front()->help());
    return kExitValidation;
  }

  const auto dispatch = [&]() -> int {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "stats") return stats.run(out, err);
    if (name == "sample") return sample.run(out, err);
    if (name == "build-probes") return build.run(out, err);
    if (name == "eval-probes") return eval_probes.run(out, err);
    if (name == "eval-mlm") return eval_mlm_cmd.run(out, err);
    if (name == "report") return report.run(out, err);
    if (name == "transfer-plan") return transfer.run(out, err);
    return serve.run(out, err);
  };
  try {
    return dispatch();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConnectionError& e) {
    err << "connection error: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return kExitEnvironment;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitEnvironment;
  }
}

}  // namespace lexkit
