#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexkit/corpus.hpp"
#include "lexkit/vocabulary.hpp"

namespace lexkit {

// Marks the excised span in a probe context. Expansion into k mask tokens
// happens at scoring time, under the scorer's tokenizer.
inline constexpr std::string_view kSpanSentinel = "<|span|>";

struct ProbeInstance {
  std::string instance_id;
  std::string task_id;
  std::string context;
  std::string gold_surface;
  std::string cluster;
  std::string source_doc;
  std::string source_subcorpus;
  std::size_t source_offset = 0;  // byte offset of the span in the document

  nlohmann::json to_json() const;
  static ProbeInstance from_json(const nlohmann::json& obj);
};

std::size_t count_sentinels(std::string_view text);

struct TermOccurrence {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t label = 0;
};

// Whole-word occurrences of all vocabulary terms, resolved leftmost-longest
// so overlapping terms ("drug trafficking" / "trafficking") count once.
std::vector<TermOccurrence> find_term_occurrences(std::string_view text,
                                                  const TermVocabulary& vocab);

// Whole-word occurrences of one surface under a match policy.
std::size_t count_surface(std::string_view text, std::string_view surface, MatchPolicy policy);

// Word-boundary-respecting excerpt [begin, end) of at most `window_chars`
// bytes around span [span_begin, span_end). Empty when the span alone
// exceeds the window.
std::optional<std::pair<std::size_t, std::size_t>> excerpt_window(
    std::string_view text, std::size_t span_begin, std::size_t span_end,
    std::size_t window_chars);

enum class MultiOccurrencePolicy {
  skip_paragraph,      // any second vocabulary hit drops the paragraph
  skip_repeated_gold,  // only a repeated gold term drops it
};

struct ProbeBuildOptions {
  std::size_t window_chars = 2000;
  std::size_t max_per_label = 200;  // 0 disables the cap
  std::uint64_t seed = 0;
  MultiOccurrencePolicy multi = MultiOccurrencePolicy::skip_paragraph;
  std::size_t jobs = 1;
};

struct LabelCoverage {
  std::string surface;
  std::string cluster;
  std::size_t found = 0;    // candidates before the cap
  std::size_t emitted = 0;  // instances kept
};

struct ProbeBuildResult {
  std::vector<ProbeInstance> instances;
  std::vector<LabelCoverage> coverage;  // vocabulary order
  std::size_t test_documents = 0;
  std::size_t paragraphs = 0;
  std::size_t skipped_multi = 0;
  std::size_t skipped_other = 0;  // sentinel collisions, oversized spans
  IngestDiagnostics diagnostics;

  std::vector<std::string> uncovered_labels() const;
  nlohmann::json coverage_json() const;
};

// Scans the test split for verbatim vocabulary terms and emits one masked
// cloze instance per usable occurrence. Output is canonically ordered by
// (task, sub-corpus, document, offset) and independent of `jobs`.
ProbeBuildResult build_probes(const Corpus& corpus, const TermVocabulary& vocab,
                              const ProbeBuildOptions& options);

struct ProbeViolation {
  std::string instance_id;
  std::string message;
};

struct ProbeValidationReport {
  std::vector<ProbeViolation> violations;
  std::vector<std::pair<std::string, std::size_t>> per_label;  // vocabulary order
  std::size_t n_instances = 0;
  double avg_input_tokens = 0.0;      // #T
  std::size_t n_labels = 0;           // #L
  double avg_tokens_per_label = 0.0;  // #T/L

  bool ok() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

ProbeValidationReport validate_probes(const std::vector<ProbeInstance>& instances,
                                      const TermVocabulary& vocab);

// Round-trip check against the source documents: substituting the gold
// surface for the sentinel must give text found verbatim in the document
// (compared case-folded under a case-insensitive policy).
std::vector<ProbeViolation> check_source_round_trip(
    const std::vector<ProbeInstance>& instances, const Corpus& corpus, MatchPolicy policy);

std::string fill_sentinel(std::string_view context, std::string_view surface);

void write_probes(std::ostream& out, const std::vector<ProbeInstance>& instances);
std::vector<ProbeInstance> read_probes(const std::filesystem::path& path);

}  // namespace lexkit
