#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexkit {

enum class Split { train, test };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view name);

struct ManifestEntry {
  std::string subcorpus_id;
  std::filesystem::path path;
  std::string jurisdiction;
  std::string doc_type;
};

// Declarative description of the sub-corpora. Relative entry paths are
// resolved against the manifest's directory.
struct CorpusManifest {
  std::string version;
  std::vector<ManifestEntry> entries;

  static CorpusManifest load(const std::filesystem::path& path);
  static CorpusManifest from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir);
  nlohmann::json to_json() const;

  // Unique ids, non-empty entry list, every path present.
  void validate() const;
};

struct DocumentRecord {
  std::string doc_id;
  std::string subcorpus_id;
  std::string text;
  Split split = Split::train;
  bool split_given = false;  // `split` came from the input line
  std::size_t approx_tokens = 0;
};

// Keyed-hash train/test assignment for documents without an explicit split.
struct SplitPolicy {
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

// Pure function of (doc_id, seed, test_fraction).
Split assign_split(std::string_view doc_id, const SplitPolicy& policy);

struct IngestOptions {
  bool strict = false;  // malformed lines become fatal
  std::size_t max_stored_warnings = 100;
};

struct IngestDiagnostics {
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::vector<std::string> warnings;

  void merge(const IngestDiagnostics& other, std::size_t max_warnings);
};

// Streams DocumentRecords out of one sub-corpus JSONL file. Diagnostics are
// collected on the first pass only; rewind() starts another pass.
class DocumentReader {
 public:
  DocumentReader(ManifestEntry entry, IngestOptions options, SplitPolicy policy);

  std::optional<DocumentRecord> next();
  void rewind();

  const ManifestEntry& entry() const { return entry_; }
  const IngestDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  void malformed(std::string_view reason);

  ManifestEntry entry_;
  IngestOptions options_;
  SplitPolicy policy_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::size_t pass_ = 0;
  std::unordered_set<std::string> seen_ids_;
  IngestDiagnostics diagnostics_;
};

// Handle over a validated manifest. Cheap to copy; documents are streamed
// from disk on every traversal.
class Corpus {
 public:
  Corpus(CorpusManifest manifest, IngestOptions options, SplitPolicy policy);

  const CorpusManifest& manifest() const { return manifest_; }
  const SplitPolicy& split_policy() const { return policy_; }
  const IngestOptions& ingest_options() const { return options_; }
  std::size_t size() const { return manifest_.entries.size(); }

  DocumentReader open(std::size_t subcorpus) const;

  // Visits every record in manifest order, then file order.
  IngestDiagnostics for_each(
      const std::function<void(const DocumentRecord&)>& visit) const;

  Corpus with_split_policy(SplitPolicy policy) const;

 private:
  CorpusManifest manifest_;
  IngestOptions options_;
  SplitPolicy policy_;
};

// Validates the manifest (missing files are fatal) and returns a streaming
// handle using the default split policy.
Corpus ingest(const CorpusManifest& manifest, IngestOptions options = {});

// Re-keys split assignment. Requires 0 < test_fraction < 1. Documents that
// carry an explicit split keep it.
Corpus assign_splits(const Corpus& corpus, double test_fraction,
                     std::uint64_t seed);

struct SubcorpusStats {
  std::string subcorpus_id;
  std::size_t doc_count = 0;
  std::size_t token_count = 0;
  double share = 0.0;
};

struct CorpusStats {
  std::vector<SubcorpusStats> subcorpora;
  std::size_t total_docs = 0;
  std::size_t total_tokens = 0;
  // False when the corpus holds no tokens and shares are undefined.
  bool shares_defined = false;

  std::vector<double> shares() const;
};

// Commutative, associative tally so sub-corpora can be counted in parallel.
class StatsAccumulator {
 public:
  void add(const DocumentRecord& record);
  void merge(const StatsAccumulator& other);
  CorpusStats finish(const std::vector<std::string>& order) const;

 private:
  struct Tally {
    std::size_t docs = 0;
    std::size_t tokens = 0;
  };
  std::vector<std::pair<std::string, Tally>> tallies_;
  Tally& tally(const std::string& id);
};

CorpusStats compute_stats(const Corpus& corpus, std::size_t jobs = 1,
                          IngestDiagnostics* diagnostics = nullptr);

// Stats rendering mirroring the corpus-statistics table. `rates`, when
// given, fills the sampling column.
nlohmann::json stats_to_json(const CorpusStats& stats,
                             const std::vector<double>* rates = nullptr,
                             std::optional<double> alpha = std::nullopt);
std::string stats_to_markdown(const CorpusStats& stats,
                              const std::vector<double>* rates = nullptr);

// 93.7K, 233.7M, 1.4B.
std::string humanize_count(std::size_t n);

}  // namespace lexkit
