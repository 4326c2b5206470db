#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexkit/probes.hpp"
#include "lexkit/scorer.hpp"
#include "lexkit/vocabulary.hpp"

namespace lexkit {

// Constrained candidate set of one task: the union of the sub-token ids of
// every label, under one scorer's tokenizer.
struct CandidateSet {
  std::string task_id;
  std::string model_id;
  TokenizeMode mode = TokenizeMode::with_leading_space;
  std::map<std::string, std::vector<TokenId>> label_ids;  // surface -> ids
  std::vector<TokenId> ids;                               // sorted union

  const std::vector<TokenId>& tokens_of(const std::string& surface) const;

  nlohmann::json to_json() const;
  static CandidateSet from_json(const nlohmann::json& doc);
};

CandidateSet build_candidate_set(const TermVocabulary& vocab, Scorer& scorer,
                                 TokenizeMode mode = TokenizeMode::with_leading_space);

// Loads a cached candidate set, rejecting it when it was built for another
// task or model.
CandidateSet load_candidate_set(const std::filesystem::path& path, const TermVocabulary& vocab,
                                Scorer& scorer);

// 1 + #{v : s(v) > s(g)} + #{v : s(v) == s(g) and v < g}.
std::size_t rank_of(TokenId gold, const std::vector<ScoredToken>& scores);

struct InstanceResult {
  std::string instance_id;
  std::string task_id;
  std::string gold;
  std::string cluster;
  std::size_t k = 0;
  std::vector<TokenId> gold_ids;
  std::vector<std::size_t> ranks;
  std::vector<double> rr;
  double instance_mrr = 0.0;
  double instance_p1 = 0.0;
  std::size_t input_tokens = 0;  // whitespace tokens of the filled context

  nlohmann::json to_json() const;
  static InstanceResult from_json(const nlohmann::json& obj);
};

struct EvalOptions {
  // All sub-tokens must rank first for P@1 = 1; otherwise P@1 is averaged
  // over positions.
  bool strict_p1 = false;
  std::size_t jobs = 1;
};

// Fills ranks, rr and the instance means from per-position ranks.
void finalize_instance(InstanceResult& result, bool strict_p1);

InstanceResult eval_instance(const ProbeInstance& instance, const CandidateSet& cset,
                             Scorer& scorer, bool strict_p1 = false);

struct ErroredInstance {
  std::string instance_id;
  std::string message;
};

struct TaskEvaluation {
  std::vector<InstanceResult> results;  // sorted by instance id
  std::vector<ErroredInstance> errored;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // gold label absent from the vocabulary

  nlohmann::json summary_json() const;
};

// Evaluates instances concurrently. Throws when every instance errored.
TaskEvaluation eval_task(const std::vector<ProbeInstance>& instances, const CandidateSet& cset,
                         Scorer& scorer, const EvalOptions& options = {});

void write_results(std::ostream& out, const TaskEvaluation& evaluation);
// Errored lines are skipped.
std::vector<InstanceResult> read_results(const std::filesystem::path& path);

}  // namespace lexkit
