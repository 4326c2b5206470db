#include "lexkit/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/run_header.hpp"
#include "lexkit/text.hpp"

namespace lexkit {

using nlohmann::json;

const std::vector<TokenId>& CandidateSet::tokens_of(const std::string& surface) const {
  const auto it = label_ids.find(surface);
  if (it == label_ids.end()) {
    throw ValidationError(fmt::format("label '{}' is not in the candidate set of task {}",
                                      surface, task_id));
  }
  return it->second;
}

json CandidateSet::to_json() const {
  json labels = json::object();
  for (const auto& [surface, ids] : label_ids) labels[surface] = ids;
  return {{"task_id", task_id},
          {"model_id", model_id},
          {"mode", to_string(mode)},
          {"labels", labels},
          {"ids", ids}};
}

CandidateSet CandidateSet::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("labels") || !doc.contains("model_id")) {
    throw ValidationError("candidate set needs model_id and labels");
  }
  CandidateSet c;
  c.task_id = doc.value("task_id", "");
  c.model_id = doc["model_id"].get<std::string>();
  const auto mode = parse_tokenize_mode(doc.value("mode", "with_leading_space"));
  if (!mode) throw ValidationError("candidate set has an unknown tokenize mode");
  c.mode = *mode;
  std::set<TokenId> all;
  for (const auto& [surface, ids] : doc["labels"].items()) {
    auto v = ids.get<std::vector<TokenId>>();
    all.insert(v.begin(), v.end());
    c.label_ids[surface] = std::move(v);
  }
  c.ids.assign(all.begin(), all.end());
  return c;
}

CandidateSet build_candidate_set(const TermVocabulary& vocab, Scorer& scorer, TokenizeMode mode) {
  CandidateSet c;
  c.task_id = vocab.task_id();
  c.model_id = scorer.info().model_id;
  c.mode = mode;
  std::set<TokenId> all;
  for (const auto& label : vocab.labels()) {
    auto ids = scorer.tokenize(label.surface, mode).token_ids;
    if (ids.empty()) {
      throw ValidationError(fmt::format("label '{}' tokenizes to no ids under {}", label.surface,
                                        c.model_id));
    }
    all.insert(ids.begin(), ids.end());
    c.label_ids[label.surface] = std::move(ids);
  }
  c.ids.assign(all.begin(), all.end());
  if (c.ids.size() < 2) {
    throw ValidationError(fmt::format("candidate set of task {} has fewer than 2 ids", c.task_id));
  }
  return c;
}

CandidateSet load_candidate_set(const std::filesystem::path& path, const TermVocabulary& vocab,
                                Scorer& scorer) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open candidate cache {}", path.string()));
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("candidate cache is not valid JSON");
  auto c = CandidateSet::from_json(doc);
  const auto model = scorer.info().model_id;
  if (c.model_id != model) {
    throw ValidationError(fmt::format(
        "candidate cache was built for model {} but the scorer is {}; rebuild it", c.model_id,
        model));
  }
  if (c.task_id != vocab.task_id()) {
    throw ValidationError(fmt::format("candidate cache belongs to task {}, not {}", c.task_id,
                                      vocab.task_id()));
  }
  for (const auto& label : vocab.labels()) c.tokens_of(label.surface);
  return c;
}

std::size_t rank_of(TokenId gold, const std::vector<ScoredToken>& scores) {
  std::optional<double> gold_score;
  for (const auto& [id, lp] : scores) {
    if (id == gold) gold_score = lp;
  }
  if (!gold_score) throw ProtocolError(fmt::format("gold id {} was not scored", gold));
  std::size_t rank = 1;
  for (const auto& [id, lp] : scores) {
    if (lp > *gold_score || (lp == *gold_score && id < gold)) ++rank;
  }
  return rank;
}

json InstanceResult::to_json() const {
  return {{"instance_id", instance_id}, {"task_id", task_id},   {"gold", gold},
          {"cluster", cluster},         {"k", k},               {"gold_ids", gold_ids},
          {"ranks", ranks},             {"rr", rr},             {"instance_mrr", instance_mrr},
          {"instance_p1", instance_p1}, {"input_tokens", input_tokens}};
}

InstanceResult InstanceResult::from_json(const json& obj) {
  try {
    InstanceResult r;
    r.instance_id = obj.at("instance_id").get<std::string>();
    r.task_id = obj.value("task_id", "");
    r.gold = obj.at("gold").get<std::string>();
    r.cluster = obj.value("cluster", "");
    r.ranks = obj.at("ranks").get<std::vector<std::size_t>>();
    r.gold_ids = obj.value("gold_ids", std::vector<TokenId>{});
    r.input_tokens = obj.value("input_tokens", std::size_t{0});
    if (r.ranks.empty()) throw ValidationError("result has no ranks");
    for (std::size_t rank : r.ranks) {
      if (rank < 1) throw ValidationError("ranks must be positive");
    }
    r.k = r.ranks.size();
    r.rr = obj.value("rr", std::vector<double>{});
    r.instance_mrr = obj.at("instance_mrr").get<double>();
    r.instance_p1 = obj.at("instance_p1").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed result line: {}", e.what()));
  }
}

void finalize_instance(InstanceResult& r, bool strict_p1) {
  r.k = r.ranks.size();
  r.rr.clear();
  double rr_sum = 0.0;
  std::size_t firsts = 0;
  for (std::size_t rank : r.ranks) {
    r.rr.push_back(1.0 / static_cast<double>(rank));
    rr_sum += r.rr.back();
    firsts += rank == 1 ? 1 : 0;
  }
  const auto k = static_cast<double>(r.k);
  r.instance_mrr = rr_sum / k;
  if (strict_p1) {
    r.instance_p1 = firsts == r.k ? 1.0 : 0.0;
  } else {
    r.instance_p1 = static_cast<double>(firsts) / k;
  }
}

InstanceResult eval_instance(const ProbeInstance& instance, const CandidateSet& cset,
                             Scorer& scorer, bool strict_p1) {
  InstanceResult r;
  r.instance_id = instance.instance_id;
  r.task_id = instance.task_id;
  r.gold = instance.gold_surface;
  r.cluster = instance.cluster;
  r.gold_ids = cset.tokens_of(instance.gold_surface);
  r.input_tokens = count_whitespace_tokens(fill_sentinel(instance.context, instance.gold_surface));

  ScoreRequest request;
  request.context = instance.context;
  request.num_masks = static_cast<int>(r.gold_ids.size());
  request.candidate_ids = cset.ids;
  request.topk = 0;
  const auto response = scorer.fill(request);
  if (response.positions.size() != r.gold_ids.size()) {
    throw ProtocolError(fmt::format("scorer returned {} positions for {} masks",
                                    response.positions.size(), r.gold_ids.size()));
  }
  for (std::size_t i = 0; i < r.gold_ids.size(); ++i) {
    r.ranks.push_back(rank_of(r.gold_ids[i], response.positions[i].candidate_logprobs));
  }
  finalize_instance(r, strict_p1);
  return r;
}

json TaskEvaluation::summary_json() const {
  json errors = json::array();
  for (const auto& e : errored) errors.push_back({{"instance_id", e.instance_id}, {"message", e.message}});
  return {{"evaluated", evaluated},
          {"skipped", skipped},
          {"errored", errored.size()},
          {"errors", errors}};
}

TaskEvaluation eval_task(const std::vector<ProbeInstance>& instances, const CandidateSet& cset,
                         Scorer& scorer, const EvalOptions& options) {
  if (instances.empty()) throw ValidationError("no probe instances to evaluate");

  struct Slot {
    std::optional<InstanceResult> result;
    std::optional<std::string> error;
    bool skipped = false;
  };
  std::vector<Slot> slots(instances.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      const auto& inst = instances[i];
      if (!cset.label_ids.contains(inst.gold_surface)) {
        slots[i].skipped = true;
        continue;
      }
      try {
        slots[i].result = eval_instance(inst, cset, scorer, options.strict_p1);
      } catch (const ValidationError&) {
        throw;
      } catch (const Error& e) {
        slots[i].error = e.what();
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, instances.size());
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < jobs; ++t) {
      threads.emplace_back([&] {
        try {
          work();
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = instances.size();
        }
      });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  TaskEvaluation out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].skipped) {
      ++out.skipped;
    } else if (slots[i].error) {
      out.errored.push_back({instances[i].instance_id, *slots[i].error});
    } else {
      out.results.push_back(std::move(*slots[i].result));
    }
  }
  out.evaluated = out.results.size();
  if (out.results.empty() && !out.errored.empty()) {
    throw ProtocolError(fmt::format("all {} instances errored; first error: {}",
                                    out.errored.size(), out.errored.front().message));
  }
  const auto by_id = [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; };
  std::sort(out.results.begin(), out.results.end(), by_id);
  std::sort(out.errored.begin(), out.errored.end(), by_id);
  return out;
}

void write_results(std::ostream& out, const TaskEvaluation& evaluation) {
  for (const auto& r : evaluation.results) out << r.to_json().dump() << '\n';
  for (const auto& e : evaluation.errored) {
    out << json{{"instance_id", e.instance_id}, {"status", "errored"}, {"message", e.message}}.dump()
        << '\n';
  }
}

std::vector<InstanceResult> read_results(const std::filesystem::path& path) {
  std::vector<InstanceResult> out;
  for_each_jsonl(path, [&](const json& line) {
    if (line.value("status", "") == "errored") return;
    out.push_back(InstanceResult::from_json(line));
  });
  return out;
}

}  // namespace lexkit
