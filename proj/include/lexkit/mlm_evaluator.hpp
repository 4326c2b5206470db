#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexkit/corpus.hpp"
#include "lexkit/scorer.hpp"

namespace lexkit {

struct MlmEvalConfig {
  double mask_rate = 0.15;
  std::size_t max_chunks = 100;  // per sub-corpus; 0 keeps every chunk
  std::uint64_t seed = 0;
  std::size_t window_chars = 1000;
  // Tokens kept per chunk; 0 uses the scorer limit minus two delimiters.
  std::size_t token_budget = 0;
  std::size_t jobs = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

// Number of positions masked out of `eligible`: ceil(rate * eligible), at
// least one.
std::size_t masked_count(std::size_t eligible, double rate);

// Seeded, content-independent choice of `count` distinct positions out of
// `eligible`, returned in ascending order.
std::vector<std::size_t> choose_mask_positions(const std::vector<std::size_t>& eligible,
                                               std::size_t count, std::uint64_t seed);

struct MlmSubcorpusResult {
  std::string subcorpus_id;
  std::size_t chunks = 0;
  std::size_t truncated_chunks = 0;
  std::size_t masked = 0;
  std::size_t correct = 0;

  double accuracy() const;
};

struct MlmReport {
  std::string model_id;
  std::vector<MlmSubcorpusResult> subcorpora;  // manifest order

  // Unweighted mean over sub-corpora with at least one masked token.
  double average() const;
  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

MlmReport eval_mlm(const Corpus& corpus, const MlmEvalConfig& config, Scorer& scorer);

}  // namespace lexkit
