#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/hashing.hpp"
#include "lexkit/probes.hpp"
#include "lexkit/random.hpp"
#include "lexkit/run_header.hpp"
#include "lexkit/text.hpp"

namespace lexkit {

using nlohmann::json;

json ProbeInstance::to_json() const {
  return {{"instance_id", instance_id},   {"task_id", task_id},
          {"context", context},           {"gold_surface", gold_surface},
          {"cluster", cluster},           {"source_doc", source_doc},
          {"source_subcorpus", source_subcorpus}, {"source_offset", source_offset}};
}

ProbeInstance ProbeInstance::from_json(const json& obj) {
  ProbeInstance p;
  try {
    p.instance_id = obj.at("instance_id").get<std::string>();
    p.task_id = obj.at("task_id").get<std::string>();
    p.context = obj.at("context").get<std::string>();
    p.gold_surface = obj.at("gold_surface").get<std::string>();
    p.cluster = obj.at("cluster").get<std::string>();
    p.source_doc = obj.value("source_doc", "");
    p.source_subcorpus = obj.value("source_subcorpus", "");
    p.source_offset = obj.value("source_offset", std::size_t{0});
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed probe instance: {}", e.what()));
  }
  return p;
}

std::size_t count_sentinels(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(kSpanSentinel); pos != std::string_view::npos;
       pos = text.find(kSpanSentinel, pos + kSpanSentinel.size())) {
    ++n;
  }
  return n;
}

namespace {

// Appends whole-word hits of `needle` in `hay`; `original` supplies the
// boundary characters (identical to `hay` unless case-folded).
void scan_whole_words(std::string_view hay, std::string_view original, std::string_view needle,
                      std::size_t label, std::vector<TermOccurrence>& out) {
  if (needle.empty()) return;
  for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    const std::size_t end = pos + needle.size();
    if (is_word_boundary_before(original, pos) && is_word_boundary_after(original, end)) {
      out.push_back({pos, end, label});
    }
  }
}

}  // namespace

std::vector<TermOccurrence> find_term_occurrences(std::string_view text,
                                                  const TermVocabulary& vocab) {
  const bool fold = vocab.match_policy() == MatchPolicy::case_insensitive;
  const std::string lowered = fold ? ascii_lower(text) : std::string();
  const std::string_view hay = fold ? std::string_view(lowered) : text;

  std::vector<TermOccurrence> all;
  const auto& labels = vocab.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string needle = fold ? ascii_lower(labels[i].surface) : labels[i].surface;
    scan_whole_words(hay, text, needle, i, all);
  }
  std::sort(all.begin(), all.end(), [](const TermOccurrence& a, const TermOccurrence& b) {
    return std::tuple(a.begin, b.end, a.label) < std::tuple(b.begin, a.end, b.label);
  });
  std::vector<TermOccurrence> resolved;
  std::size_t covered = 0;
  for (const auto& occ : all) {
    if (!resolved.empty() && occ.begin < covered) continue;
    resolved.push_back(occ);
    covered = occ.end;
  }
  return resolved;
}

std::size_t count_surface(std::string_view text, std::string_view surface, MatchPolicy policy) {
  std::vector<TermOccurrence> hits;
  if (policy == MatchPolicy::case_insensitive) {
    const std::string hay = ascii_lower(text);
    scan_whole_words(hay, text, ascii_lower(surface), 0, hits);
  } else {
    scan_whole_words(text, text, surface, 0, hits);
  }
  return hits.size();
}

std::optional<std::pair<std::size_t, std::size_t>> excerpt_window(
    std::string_view text, std::size_t span_begin, std::size_t span_end,
    std::size_t window_chars) {
  const std::size_t span = span_end - span_begin;
  if (span > window_chars) return std::nullopt;
  const std::size_t budget = window_chars - span;
  std::size_t left = budget / 2;
  std::size_t right = budget - left;
  const std::size_t avail_left = span_begin;
  const std::size_t avail_right = text.size() - span_end;
  if (avail_left < left) {
    right += left - avail_left;
    left = avail_left;
  }
  if (avail_right < right) {
    left = std::min(avail_left, left + (right - avail_right));
    right = avail_right;
  }
  std::size_t b = span_begin - left;
  std::size_t e = span_end + right;
  // Only cut where whitespace separates words.
  while (b < span_begin && b > 0 && !is_space(text[b - 1])) ++b;
  while (e > span_end && e < text.size() && !is_space(text[e])) --e;
  while (b < span_begin && is_space(text[b])) ++b;
  while (e > span_end && is_space(text[e - 1])) --e;
  return std::pair{b, e};
}

std::string fill_sentinel(std::string_view context, std::string_view surface) {
  std::string out(context);
  const auto pos = out.find(kSpanSentinel);
  if (pos != std::string::npos) out.replace(pos, kSpanSentinel.size(), surface);
  return out;
}

std::vector<std::string> ProbeBuildResult::uncovered_labels() const {
  std::vector<std::string> out;
  for (const auto& c : coverage) {
    if (c.found == 0) out.push_back(c.surface);
  }
  return out;
}

json ProbeBuildResult::coverage_json() const {
  json labels = json::array();
  for (const auto& c : coverage) {
    labels.push_back({{"surface", c.surface},
                      {"cluster", c.cluster},
                      {"found", c.found},
                      {"emitted", c.emitted}});
  }
  return {{"instances", instances.size()},
          {"test_documents", test_documents},
          {"paragraphs", paragraphs},
          {"skipped_multi_occurrence", skipped_multi},
          {"skipped_other", skipped_other},
          {"malformed_lines", diagnostics.malformed},
          {"uncovered_labels", uncovered_labels()},
          {"labels", labels}};
}

namespace {

struct Candidate {
  ProbeInstance instance;
  std::size_t label = 0;
  std::size_t subcorpus = 0;
  std::uint64_t priority = 0;
};

struct ScanResult {
  std::vector<Candidate> candidates;
  std::size_t test_documents = 0;
  std::size_t paragraphs = 0;
  std::size_t skipped_multi = 0;
  std::size_t skipped_other = 0;
  IngestDiagnostics diagnostics;
};

ScanResult scan_subcorpus(const Corpus& corpus, std::size_t index, const TermVocabulary& vocab,
                          const ProbeBuildOptions& options,
                          const std::vector<std::uint64_t>& label_keys) {
  ScanResult out;
  auto reader = corpus.open(index);
  const auto& labels = vocab.labels();
  while (auto doc = reader.next()) {
    if (doc->split != Split::test) continue;
    ++out.test_documents;
    for (const auto& para : split_paragraphs(doc->text)) {
      ++out.paragraphs;
      const auto hits = find_term_occurrences(para.text, vocab);
      if (hits.empty()) continue;
      if (options.multi == MultiOccurrencePolicy::skip_paragraph && hits.size() > 1) {
        ++out.skipped_multi;
        continue;
      }
      if (count_sentinels(para.text) > 0) {
        ++out.skipped_other;
        continue;
      }
      std::unordered_map<std::size_t, std::size_t> per_label;
      for (const auto& h : hits) ++per_label[h.label];
      for (const auto& h : hits) {
        if (per_label[h.label] > 1) {
          ++out.skipped_multi;
          continue;
        }
        const auto window = excerpt_window(para.text, h.begin, h.end, options.window_chars);
        if (!window) {
          ++out.skipped_other;
          continue;
        }
        const auto [b, e] = *window;
        std::string context;
        context.reserve(e - b + kSpanSentinel.size());
        context.append(para.text.substr(b, h.begin - b));
        context.append(kSpanSentinel);
        context.append(para.text.substr(h.end, e - h.end));
        const auto& label = labels[h.label];
        if (count_surface(context, label.surface, vocab.match_policy()) > 0) {
          ++out.skipped_multi;
          continue;
        }
        Candidate c;
        c.label = h.label;
        c.subcorpus = index;
        c.instance.task_id = vocab.task_id();
        c.instance.context = std::move(context);
        c.instance.gold_surface = label.surface;
        c.instance.cluster = label.cluster;
        c.instance.source_doc = doc->doc_id;
        c.instance.source_subcorpus = doc->subcorpus_id;
        c.instance.source_offset = para.offset + h.begin;
        c.instance.instance_id = fmt::format("{}:{}:{}:{}", vocab.task_id(), doc->subcorpus_id,
                                             doc->doc_id, c.instance.source_offset);
        c.priority = keyed_hash(c.instance.instance_id, label_keys[h.label]);
        out.candidates.push_back(std::move(c));
      }
    }
  }
  out.diagnostics = reader.diagnostics();
  return out;
}

}  // namespace

ProbeBuildResult build_probes(const Corpus& corpus, const TermVocabulary& vocab,
                              const ProbeBuildOptions& options) {
  if (options.window_chars == 0) throw ValidationError("window_chars must be positive");
  const auto& labels = vocab.labels();
  std::vector<std::uint64_t> label_keys;
  for (const auto& l : labels) label_keys.push_back(derive_seed(options.seed, l.surface));

  const std::size_t n = corpus.size();
  std::vector<ScanResult> scans(n);
  const auto run = [&](std::size_t i) {
    scans[i] = scan_subcorpus(corpus, i, vocab, options, label_keys);
  };
  if (options.jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    for (std::size_t begin = 0; begin < n; begin += options.jobs) {
      std::vector<std::future<void>> wave;
      for (std::size_t i = begin; i < std::min(n, begin + options.jobs); ++i) {
        wave.push_back(std::async(std::launch::async, run, i));
      }
      for (auto& f : wave) f.get();
    }
  }

  ProbeBuildResult result;
  std::vector<std::vector<Candidate>> by_label(labels.size());
  for (auto& s : scans) {
    result.test_documents += s.test_documents;
    result.paragraphs += s.paragraphs;
    result.skipped_multi += s.skipped_multi;
    result.skipped_other += s.skipped_other;
    result.diagnostics.merge(s.diagnostics, corpus.ingest_options().max_stored_warnings);
    for (auto& c : s.candidates) by_label[c.label].push_back(std::move(c));
  }
  if (result.test_documents == 0) {
    throw ValidationError("corpus test split is empty; probes are built from test documents");
  }

  // Bottom-k by keyed hash: a seeded reservoir whose outcome does not depend
  // on scan order.
  std::vector<Candidate> kept;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& cands = by_label[i];
    LabelCoverage cov{labels[i].surface, labels[i].cluster, cands.size(), 0};
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return std::tie(a.priority, a.instance.instance_id) <
             std::tie(b.priority, b.instance.instance_id);
    });
    if (options.max_per_label > 0 && cands.size() > options.max_per_label) {
      cands.resize(options.max_per_label);
    }
    cov.emitted = cands.size();
    result.coverage.push_back(std::move(cov));
    for (auto& c : cands) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.instance.task_id, a.subcorpus, a.instance.source_doc,
                    a.instance.source_offset) < std::tie(b.instance.task_id, b.subcorpus,
                                                         b.instance.source_doc,
                                                         b.instance.source_offset);
  });
  result.instances.reserve(kept.size());
  for (auto& c : kept) result.instances.push_back(std::move(c.instance));
  return result;
}

json ProbeValidationReport::to_json() const {
  json labels = json::array();
  for (const auto& [surface, count] : per_label) {
    labels.push_back({{"surface", surface}, {"instances", count}});
  }
  json violations_json = json::array();
  for (const auto& v : violations) {
    violations_json.push_back({{"instance_id", v.instance_id}, {"message", v.message}});
  }
  return {{"n_instances", n_instances},
          {"avg_input_tokens", avg_input_tokens},
          {"n_labels", n_labels},
          {"avg_tokens_per_label", avg_tokens_per_label},
          {"per_label", labels},
          {"violations", violations_json}};
}

ProbeValidationReport validate_probes(const std::vector<ProbeInstance>& instances,
                                      const TermVocabulary& vocab) {
  ProbeValidationReport report;
  report.n_instances = instances.size();
  report.n_labels = vocab.labels().size();
  std::vector<std::size_t> counts(vocab.labels().size(), 0);
  std::unordered_set<std::string> ids;
  double total_tokens = 0.0;
  const auto flag = [&](const ProbeInstance& p, std::string message) {
    report.violations.push_back({p.instance_id, std::move(message)});
  };
  for (const auto& p : instances) {
    if (p.instance_id.empty()) flag(p, "empty instance_id");
    if (!ids.insert(p.instance_id).second) flag(p, "duplicate instance_id");
    if (p.task_id != vocab.task_id()) {
      flag(p, fmt::format("task_id '{}' does not match vocabulary '{}'", p.task_id,
                          vocab.task_id()));
    }
    const std::size_t sentinels = count_sentinels(p.context);
    if (sentinels != 1) {
      flag(p, fmt::format("context holds {} span sentinels, expected exactly 1", sentinels));
    }
    const auto label = vocab.find(p.gold_surface);
    if (!label) {
      flag(p, fmt::format("gold surface '{}' is not in the vocabulary", p.gold_surface));
    } else {
      ++counts[*label];
      if (vocab.labels()[*label].cluster != p.cluster) {
        flag(p, fmt::format("cluster '{}' does not match vocabulary cluster '{}'", p.cluster,
                            vocab.labels()[*label].cluster));
      }
    }
    if (count_surface(p.context, p.gold_surface, vocab.match_policy()) > 0) {
      flag(p, "gold surface leaks into the context outside the span");
    }
    total_tokens += static_cast<double>(
        count_whitespace_tokens(fill_sentinel(p.context, p.gold_surface)));
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    report.per_label.emplace_back(vocab.labels()[i].surface, counts[i]);
  }
  if (!instances.empty()) report.avg_input_tokens = total_tokens / instances.size();
  double label_tokens = 0.0;
  for (const auto& l : vocab.labels()) {
    label_tokens += static_cast<double>(count_whitespace_tokens(l.surface));
  }
  report.avg_tokens_per_label = label_tokens / static_cast<double>(vocab.labels().size());
  return report;
}

std::vector<ProbeViolation> check_source_round_trip(
    const std::vector<ProbeInstance>& instances, const Corpus& corpus, MatchPolicy policy) {
  // (subcorpus, doc) -> instance indices
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> wanted;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    wanted[{instances[i].source_subcorpus, instances[i].source_doc}].push_back(i);
  }
  std::vector<bool> found(instances.size(), false);
  std::vector<ProbeViolation> out;
  corpus.for_each([&](const DocumentRecord& doc) {
    const auto it = wanted.find({doc.subcorpus_id, doc.doc_id});
    if (it == wanted.end()) return;
    const bool fold = policy == MatchPolicy::case_insensitive;
    const std::string hay = fold ? ascii_lower(doc.text) : std::string();
    for (std::size_t i : it->second) {
      const auto& p = instances[i];
      found[i] = true;
      std::string filled = fill_sentinel(p.context, p.gold_surface);
      if (fold) filled = ascii_lower(filled);
      const std::string_view text = fold ? std::string_view(hay) : std::string_view(doc.text);
      if (text.find(filled) == std::string_view::npos) {
        out.push_back({p.instance_id, "filled context does not occur in the source document"});
      }
    }
  });
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!found[i]) out.push_back({instances[i].instance_id, "source document not found"});
  }
  return out;
}

void write_probes(std::ostream& out, const std::vector<ProbeInstance>& instances) {
  for (const auto& p : instances) out << p.to_json().dump() << '\n';
}

std::vector<ProbeInstance> read_probes(const std::filesystem::path& path) {
  std::vector<ProbeInstance> out;
  for_each_jsonl(path, [&](const json& obj) { out.push_back(ProbeInstance::from_json(obj)); });
  return out;
}

}  // namespace lexkit
