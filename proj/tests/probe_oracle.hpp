#pragma once

// Planted-term corpus generator and a brute-force probe oracle that shares no
// code with the builder: paragraphs come from splitting on "\n\n", matches
// from a per-position comparison loop.

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "lexkit/random.hpp"
#include "lexkit/vocabulary.hpp"
#include "test_support.hpp"

namespace lexkit::testing {

inline TermVocabulary planted_vocabulary(MatchPolicy policy = MatchPolicy::case_sensitive) {
  return TermVocabulary("planted",
                        {{"theft", "property"},
                         {"burglary", "property"},
                         {"drug trafficking", "drugs"},
                         {"trafficking", "drugs"},
                         {"money laundering", "finance"},
                         {"fraud", "finance"},
                         {"Article 6", "articles"},
                         {"Article 10", "articles"}},
                        policy);
}

struct PlantedDoc {
  std::string subcorpus;
  FixtureDoc doc;
};

// Paragraphs are joined by exactly one blank line and never start or end
// with whitespace, so the oracle can split on "\n\n" alone.
inline std::vector<std::pair<std::string, std::vector<FixtureDoc>>> planted_corpus(
    std::size_t n_docs, std::uint64_t seed) {
  static const std::vector<std::string> filler{
      "the",   "court",  "held",   "that",    "appellant", "was",    "convicted",
      "of",    "under",  "section", "statute", "appeal",   "denied", "motion",
      "jury",  "found",  "record", "thefts",  "frauds",    "Articles", "6",
      "drug",  "money",  "witness", "evidence", "agreed",  "remand", "order"};
  static const std::vector<std::string> terms{"theft",      "burglary",         "drug trafficking",
                                              "trafficking", "money laundering", "fraud",
                                              "Article 6",  "Article 10"};
  static const std::vector<std::string> decor{"", ",", ".", ";", ")"};
  std::vector<std::pair<std::string, std::vector<FixtureDoc>>> subs{
      {"alpha", {}}, {"beta", {}}, {"gamma", {}}};
  Rng rng(seed);
  for (std::size_t d = 0; d < n_docs; ++d) {
    FixtureDoc doc;
    doc.id = "doc" + std::to_string(d);
    doc.split = rng.below(10) < 6 ? "test" : "train";
    const std::size_t paragraphs = 1 + rng.below(4);
    for (std::size_t p = 0; p < paragraphs; ++p) {
      if (p > 0) doc.text += "\n\n";
      const std::size_t words = 4 + rng.below(30);
      const std::size_t planted = rng.below(10) < 2 ? 2 : (rng.below(10) < 7 ? 1 : 0);
      std::vector<std::size_t> slots;
      for (std::size_t i = 0; i < planted; ++i) slots.push_back(rng.below(words));
      std::string para;
      for (std::size_t w = 0; w < words; ++w) {
        std::string word = filler[rng.below(filler.size())];
        for (std::size_t s : slots) {
          if (s == w) word = terms[rng.below(terms.size())];
        }
        const auto roll = rng.below(40);
        if (roll == 0) word += "x";           // not a whole-word hit
        if (roll == 1) word = "<|span|>";    // sentinel collision
        if (roll == 2) word = "Theft";       // case variant
        if (!para.empty()) para += rng.below(8) == 0 ? "\n" : " ";
        para += word + decor[rng.below(decor.size())];
      }
      doc.text += para;
    }
    subs[rng.below(subs.size())].second.push_back(std::move(doc));
  }
  return subs;
}

struct OracleInstance {
  std::string id;
  std::string context;
  std::string gold;
  auto operator<=>(const OracleInstance&) const = default;
};

namespace oracle_detail {

inline bool word_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

inline char fold(char c, bool ci) {
  return ci ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : c;
}

inline bool match_at(const std::string& text, std::size_t pos, const std::string& term, bool ci) {
  if (pos + term.size() > text.size()) return false;
  for (std::size_t i = 0; i < term.size(); ++i) {
    if (fold(text[pos + i], ci) != fold(term[i], ci)) return false;
  }
  const bool left_ok = pos == 0 || !word_byte(static_cast<unsigned char>(text[pos - 1]));
  const std::size_t end = pos + term.size();
  const bool right_ok = end == text.size() || !word_byte(static_cast<unsigned char>(text[end]));
  return left_ok && right_ok;
}

}  // namespace oracle_detail

// Expected instances for a corpus with paragraphs no longer than the window,
// the skip-paragraph policy and no per-label cap.
inline std::vector<OracleInstance> probe_oracle(
    const std::vector<std::pair<std::string, std::vector<FixtureDoc>>>& subs,
    const TermVocabulary& vocab) {
  using namespace oracle_detail;
  const bool ci = vocab.match_policy() == MatchPolicy::case_insensitive;
  std::vector<OracleInstance> out;
  for (const auto& [sub, docs] : subs) {
    for (const auto& doc : docs) {
      if (doc.split != "test") continue;
      std::size_t start = 0;
      while (start <= doc.text.size()) {
        std::size_t stop = doc.text.find("\n\n", start);
        if (stop == std::string::npos) stop = doc.text.size();
        const std::string para = doc.text.substr(start, stop - start);
        // Leftmost-longest scan.
        std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> hits;
        for (std::size_t pos = 0; pos < para.size();) {
          std::size_t best = vocab.labels().size();
          std::size_t best_len = 0;
          for (std::size_t l = 0; l < vocab.labels().size(); ++l) {
            const auto& term = vocab.labels()[l].surface;
            if (term.size() > best_len && match_at(para, pos, term, ci)) {
              best = l;
              best_len = term.size();
            }
          }
          if (best_len == 0) {
            ++pos;
          } else {
            hits.emplace_back(pos, best_len, best);
            pos += best_len;
          }
        }
        if (hits.size() == 1 && para.find("<|span|>") == std::string::npos) {
          const auto [pos, len, label] = hits[0];
          OracleInstance inst;
          inst.id = "planted:" + sub + ":" + doc.id + ":" + std::to_string(start + pos);
          inst.context = para.substr(0, pos) + "<|span|>" + para.substr(pos + len);
          inst.gold = vocab.labels()[label].surface;
          out.push_back(std::move(inst));
        }
        start = stop + 2;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace lexkit::testing
