#include "lexkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/hashing.hpp"
#include "lexkit/text.hpp"

namespace lexkit {

using nlohmann::json;

std::string_view to_string(Split split) {
  return split == Split::test ? "test" : "train";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  return std::nullopt;
}

CorpusManifest CorpusManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open manifest {}", path.string()));
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw ValidationError(fmt::format("manifest {} is not valid JSON", path.string()));
  }
  return from_json(doc, path.parent_path());
}

CorpusManifest CorpusManifest::from_json(const json& doc,
                                         const std::filesystem::path& base_dir) {
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw ValidationError("manifest must be an object with an \"entries\" array");
  }
  CorpusManifest m;
  m.version = doc.value("version", "");
  for (const auto& e : doc["entries"]) {
    if (!e.is_object() || !e.contains("subcorpus_id") || !e.contains("path") ||
        !e["subcorpus_id"].is_string() || !e["path"].is_string()) {
      throw ValidationError("manifest entry needs string fields subcorpus_id and path");
    }
    ManifestEntry entry;
    entry.subcorpus_id = e["subcorpus_id"].get<std::string>();
    std::filesystem::path p = e["path"].get<std::string>();
    entry.path = p.is_relative() ? base_dir / p : p;
    entry.jurisdiction = e.value("jurisdiction", "");
    entry.doc_type = e.value("doc_type", "");
    m.entries.push_back(std::move(entry));
  }
  return m;
}

json CorpusManifest::to_json() const {
  json entries = json::array();
  for (const auto& e : this->entries) {
    entries.push_back({{"subcorpus_id", e.subcorpus_id},
                       {"path", e.path.string()},
                       {"jurisdiction", e.jurisdiction},
                       {"doc_type", e.doc_type}});
  }
  return {{"version", version}, {"entries", entries}};
}

void CorpusManifest::validate() const {
  if (entries.empty()) throw ValidationError("manifest has no entries");
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (e.subcorpus_id.empty()) throw ValidationError("empty subcorpus_id in manifest");
    if (!ids.insert(e.subcorpus_id).second) {
      throw ValidationError(fmt::format("duplicate subcorpus_id '{}'", e.subcorpus_id));
    }
    if (!std::filesystem::is_regular_file(e.path)) {
      throw IoError(fmt::format("sub-corpus '{}': file not found: {}", e.subcorpus_id,
                                e.path.string()));
    }
  }
}

Split assign_split(std::string_view doc_id, const SplitPolicy& policy) {
  return unit_interval(keyed_hash(doc_id, policy.seed)) < policy.test_fraction
             ? Split::test
             : Split::train;
}

void IngestDiagnostics::merge(const IngestDiagnostics& other,
                              std::size_t max_warnings) {
  records += other.records;
  malformed += other.malformed;
  for (const auto& w : other.warnings) {
    if (warnings.size() >= max_warnings) break;
    warnings.push_back(w);
  }
}

DocumentReader::DocumentReader(ManifestEntry entry, IngestOptions options,
                               SplitPolicy policy)
    : entry_(std::move(entry)), options_(options), policy_(policy), in_(entry_.path) {
  if (!in_) {
    throw IoError(fmt::format("cannot open {} for sub-corpus '{}'", entry_.path.string(),
                              entry_.subcorpus_id));
  }
}

void DocumentReader::rewind() {
  in_.clear();
  in_.seekg(0);
  line_no_ = 0;
  ++pass_;
  seen_ids_.clear();
}

void DocumentReader::malformed(std::string_view reason) {
  const std::string message =
      fmt::format("{}:{}: {}", entry_.path.filename().string(), line_no_, reason);
  if (options_.strict) throw ValidationError("malformed line " + message);
  if (pass_ > 0) return;
  ++diagnostics_.malformed;
  if (diagnostics_.warnings.size() < options_.max_stored_warnings) {
    diagnostics_.warnings.push_back(message);
  }
}

std::optional<DocumentRecord> DocumentReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      malformed("not a JSON object");
      continue;
    }
    const auto id = obj.find("id");
    const auto text = obj.find("text");
    if (id == obj.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
      malformed("missing string field 'id'");
      continue;
    }
    if (text == obj.end() || !text->is_string() ||
        trim(text->get_ref<const std::string&>()).empty()) {
      malformed("missing or empty string field 'text'");
      continue;
    }
    DocumentRecord rec;
    rec.doc_id = id->get<std::string>();
    if (const auto split = obj.find("split"); split != obj.end()) {
      const auto parsed = split->is_string()
                              ? parse_split(split->get_ref<const std::string&>())
                              : std::nullopt;
      if (!parsed) {
        malformed("field 'split' must be \"train\" or \"test\"");
        continue;
      }
      rec.split = *parsed;
      rec.split_given = true;
    } else {
      rec.split = assign_split(rec.doc_id, policy_);
    }
    if (!seen_ids_.insert(rec.doc_id).second) {
      malformed(fmt::format("duplicate document id '{}'", rec.doc_id));
      continue;
    }
    rec.subcorpus_id = entry_.subcorpus_id;
    rec.text = text->get<std::string>();
    rec.approx_tokens = count_whitespace_tokens(rec.text);
    if (pass_ == 0) ++diagnostics_.records;
    return rec;
  }
  return std::nullopt;
}

Corpus::Corpus(CorpusManifest manifest, IngestOptions options, SplitPolicy policy)
    : manifest_(std::move(manifest)), options_(options), policy_(policy) {}

DocumentReader Corpus::open(std::size_t subcorpus) const {
  return DocumentReader(manifest_.entries.at(subcorpus), options_, policy_);
}

IngestDiagnostics Corpus::for_each(
    const std::function<void(const DocumentRecord&)>& visit) const {
  IngestDiagnostics total;
  for (std::size_t i = 0; i < size(); ++i) {
    auto reader = open(i);
    while (auto rec = reader.next()) visit(*rec);
    total.merge(reader.diagnostics(), options_.max_stored_warnings);
  }
  return total;
}

Corpus Corpus::with_split_policy(SplitPolicy policy) const {
  return Corpus(manifest_, options_, policy);
}

Corpus ingest(const CorpusManifest& manifest, IngestOptions options) {
  manifest.validate();
  return Corpus(manifest, options, SplitPolicy{});
}

Corpus assign_splits(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError(
        fmt::format("test_fraction must lie in (0, 1), got {}", test_fraction));
  }
  return corpus.with_split_policy(SplitPolicy{test_fraction, seed});
}

std::vector<double> CorpusStats::shares() const {
  std::vector<double> out;
  out.reserve(subcorpora.size());
  for (const auto& s : subcorpora) out.push_back(s.share);
  return out;
}

StatsAccumulator::Tally& StatsAccumulator::tally(const std::string& id) {
  for (auto& [key, t] : tallies_) {
    if (key == id) return t;
  }
  tallies_.emplace_back(id, Tally{});
  return tallies_.back().second;
}

void StatsAccumulator::add(const DocumentRecord& record) {
  auto& t = tally(record.subcorpus_id);
  ++t.docs;
  t.tokens += record.approx_tokens;
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  for (const auto& [id, t] : other.tallies_) {
    auto& mine = tally(id);
    mine.docs += t.docs;
    mine.tokens += t.tokens;
  }
}

CorpusStats StatsAccumulator::finish(const std::vector<std::string>& order) const {
  CorpusStats stats;
  for (const auto& id : order) {
    SubcorpusStats s;
    s.subcorpus_id = id;
    for (const auto& [key, t] : tallies_) {
      if (key == id) {
        s.doc_count = t.docs;
        s.token_count = t.tokens;
      }
    }
    stats.total_docs += s.doc_count;
    stats.total_tokens += s.token_count;
    stats.subcorpora.push_back(std::move(s));
  }
  stats.shares_defined = stats.total_tokens > 0;
  if (stats.shares_defined) {
    const double total = static_cast<double>(stats.total_tokens);
    for (auto& s : stats.subcorpora) s.share = static_cast<double>(s.token_count) / total;
  }
  return stats;
}

CorpusStats compute_stats(const Corpus& corpus, std::size_t jobs,
                          IngestDiagnostics* diagnostics) {
  const std::size_t n = corpus.size();
  std::vector<StatsAccumulator> partial(n);
  std::vector<IngestDiagnostics> diags(n);
  const auto count_one = [&](std::size_t i) {
    auto reader = corpus.open(i);
    while (auto rec = reader.next()) partial[i].add(*rec);
    diags[i] = reader.diagnostics();
  };
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) count_one(i);
  } else {
    for (std::size_t begin = 0; begin < n; begin += jobs) {
      std::vector<std::future<void>> wave;
      for (std::size_t i = begin; i < std::min(n, begin + jobs); ++i) {
        wave.push_back(std::async(std::launch::async, count_one, i));
      }
      for (auto& f : wave) f.get();
    }
  }
  StatsAccumulator total;
  std::vector<std::string> order;
  IngestDiagnostics all;
  for (std::size_t i = 0; i < n; ++i) {
    total.merge(partial[i]);
    order.push_back(corpus.manifest().entries[i].subcorpus_id);
    all.merge(diags[i], corpus.ingest_options().max_stored_warnings);
  }
  if (diagnostics) *diagnostics = std::move(all);
  return total.finish(order);
}

std::string humanize_count(std::size_t n) {
  const double v = static_cast<double>(n);
  if (n >= 1'000'000'000) return fmt::format("{:.1f}B", v / 1e9);
  if (n >= 1'000'000) return fmt::format("{:.1f}M", v / 1e6);
  if (n >= 1'000) return fmt::format("{:.1f}K", v / 1e3);
  return std::to_string(n);
}

json stats_to_json(const CorpusStats& stats, const std::vector<double>* rates,
                   std::optional<double> alpha) {
  json rows = json::array();
  for (std::size_t i = 0; i < stats.subcorpora.size(); ++i) {
    const auto& s = stats.subcorpora[i];
    json row = {{"subcorpus_id", s.subcorpus_id},
                {"doc_count", s.doc_count},
                {"token_count", s.token_count}};
    row["share"] = stats.shares_defined ? json(s.share) : json(nullptr);
    if (rates) row["sampling_rate"] = rates->at(i);
    rows.push_back(std::move(row));
  }
  json out = {{"subcorpora", rows},
              {"total_docs", stats.total_docs},
              {"total_tokens", stats.total_tokens},
              {"shares_defined", stats.shares_defined}};
  if (alpha) out["alpha"] = *alpha;
  return out;
}

std::string stats_to_markdown(const CorpusStats& stats, const std::vector<double>* rates) {
  std::string out;
  out += "| Sub-Corpus | # Documents | # Tokens / Percentage (%) |";
  out += rates ? " Sampling Smoothing (%) |\n" : "\n";
  out += "|---|---:|---:|";
  out += rates ? "---:|\n" : "\n";
  const auto pct = [](double f) { return fmt::format("{:04.1f}%", 100.0 * f); };
  for (std::size_t i = 0; i < stats.subcorpora.size(); ++i) {
    const auto& s = stats.subcorpora[i];
    out += fmt::format("| {} | {} | {} ({}) |", s.subcorpus_id, humanize_count(s.doc_count),
                       humanize_count(s.token_count),
                       stats.shares_defined ? pct(s.share) : std::string("n/a"));
    if (rates) out += fmt::format(" {} |", pct(rates->at(i)));
    out += "\n";
  }
  out += fmt::format("| **Total** | {} | {} ({}) |", humanize_count(stats.total_docs),
                     humanize_count(stats.total_tokens),
                     stats.shares_defined ? "100%" : "n/a");
  if (rates) out += " 100% |";
  out += "\n";
  return out;
}

}  // namespace lexkit
