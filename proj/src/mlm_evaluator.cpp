#include "lexkit/mlm_evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>

#include "lexkit/chunking.hpp"
#include "lexkit/error.hpp"
#include "lexkit/hashing.hpp"
#include "lexkit/random.hpp"

namespace lexkit {

using nlohmann::json;

void MlmEvalConfig::validate() const {
  if (!(mask_rate > 0.0 && mask_rate < 1.0)) {
    throw ValidationError(fmt::format("mask rate must lie in (0, 1), got {}", mask_rate));
  }
  if (window_chars < kMinWindowChars) {
    throw ValidationError(fmt::format("window_chars must be >= {}", kMinWindowChars));
  }
}

json MlmEvalConfig::to_json() const {
  return {{"mask_rate", mask_rate},   {"max_chunks", max_chunks},
          {"seed", seed},             {"window_chars", window_chars},
          {"token_budget", token_budget}};
}

std::size_t masked_count(std::size_t eligible, double rate) {
  if (eligible == 0) return 0;
  // The epsilon keeps exact products such as 0.15 * 20 from rounding up.
  const auto m = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(eligible) - 1e-9));
  return std::clamp<std::size_t>(m, 1, eligible);
}

std::vector<std::size_t> choose_mask_positions(const std::vector<std::size_t>& eligible,
                                               std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> pool = eligible;
  count = std::min(count, pool.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double MlmSubcorpusResult::accuracy() const {
  return masked == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(masked);
}

double MlmReport::average() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : subcorpora) {
    if (s.masked == 0) continue;
    sum += s.accuracy();
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

json MlmReport::to_json() const {
  json rows = json::array();
  for (const auto& s : subcorpora) {
    rows.push_back({{"subcorpus", s.subcorpus_id},
                    {"accuracy", s.accuracy()},
                    {"masked", s.masked},
                    {"correct", s.correct},
                    {"chunks", s.chunks},
                    {"truncated_chunks", s.truncated_chunks}});
  }
  return {{"model_id", model_id}, {"rows", rows}, {"average", average()}};
}

std::string MlmReport::to_markdown() const {
  std::string out = fmt::format("| Sub-corpus | {} |\n|---|---:|\n", model_id);
  for (const auto& s : subcorpora) {
    out += fmt::format("| {} | {:.1f} |\n", s.subcorpus_id, 100.0 * s.accuracy());
  }
  out += fmt::format("| Average | {:.1f} |\n", 100.0 * average());
  return out;
}

namespace {

struct SampledChunk {
  std::uint64_t priority = 0;
  std::size_t subcorpus = 0;
  std::string key;  // doc_id:index
  std::string text;
};

// Bottom-k by keyed hash: the kept set does not depend on file order.
std::vector<SampledChunk> sample_chunks(const Corpus& corpus, const MlmEvalConfig& config) {
  std::vector<SampledChunk> out;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    std::vector<SampledChunk> kept;
    const auto heap_less = [](const SampledChunk& a, const SampledChunk& b) {
      return std::tie(a.priority, a.key) < std::tie(b.priority, b.key);
    };
    auto reader = corpus.open(s);
    while (auto rec = reader.next()) {
      if (rec->split != Split::test) continue;
      const auto chunks = chunk_text(rec->text, config.window_chars);
      for (std::size_t i = 0; i < chunks.size(); ++i) {
        SampledChunk c{0, s, fmt::format("{}:{}", rec->doc_id, i), chunks[i]};
        c.priority = keyed_hash(c.key, derive_seed(config.seed, corpus.manifest().entries[s].subcorpus_id));
        if (config.max_chunks == 0 || kept.size() < config.max_chunks) {
          kept.push_back(std::move(c));
          std::push_heap(kept.begin(), kept.end(), heap_less);
        } else if (heap_less(c, kept.front())) {
          std::pop_heap(kept.begin(), kept.end(), heap_less);
          kept.back() = std::move(c);
          std::push_heap(kept.begin(), kept.end(), heap_less);
        }
      }
    }
    std::sort(kept.begin(), kept.end(), heap_less);
    for (auto& c : kept) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

MlmReport eval_mlm(const Corpus& corpus, const MlmEvalConfig& config, Scorer& scorer) {
  config.validate();
  const ScorerInfo info = scorer.info();
  std::size_t budget = config.token_budget;
  if (budget == 0) budget = static_cast<std::size_t>(std::max<std::int64_t>(1, info.max_input_tokens - 2));
  const std::unordered_set<TokenId> specials(info.special_ids.begin(), info.special_ids.end());

  const auto chunks = sample_chunks(corpus, config);
  if (chunks.empty()) throw ValidationError("the corpus has no test-split chunks to evaluate");

  MlmReport report;
  report.model_id = info.model_id;
  for (const auto& e : corpus.manifest().entries) report.subcorpora.push_back({e.subcorpus_id});

  std::mutex tally_mutex;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  const auto work = [&] {
    for (std::size_t i = next++; i < chunks.size(); i = next++) {
      const auto& c = chunks[i];
      auto ids = scorer.tokenize(c.text, TokenizeMode::standalone).token_ids;
      const bool truncated = ids.size() > budget;
      if (truncated) ids.resize(budget);
      std::vector<std::size_t> eligible;
      for (std::size_t p = 0; p < ids.size(); ++p) {
        if (!specials.contains(ids[p])) eligible.push_back(p);
      }
      std::size_t correct = 0;
      std::size_t masked = 0;
      if (!eligible.empty()) {
        const std::uint64_t seed = derive_seed(config.seed, report.subcorpora[c.subcorpus].subcorpus_id + "/" + c.key);
        IdFillRequest request;
        request.mask_positions =
            choose_mask_positions(eligible, masked_count(eligible.size(), config.mask_rate), seed);
        request.token_ids = ids;
        request.topk = 1;
        const auto response = scorer.fill_ids(request);
        validate_response(response, request.mask_positions.size(), {}, request.topk);
        for (std::size_t m = 0; m < request.mask_positions.size(); ++m) {
          const auto& top = response.positions[m].topk;
          if (top.empty()) throw ProtocolError("scorer returned no top-1 prediction");
          correct += top.front().first == ids[request.mask_positions[m]] ? 1 : 0;
        }
        masked = request.mask_positions.size();
      }
      std::lock_guard lock(tally_mutex);
      auto& t = report.subcorpora[c.subcorpus];
      ++t.chunks;
      t.truncated_chunks += truncated ? 1 : 0;
      t.masked += masked;
      t.correct += correct;
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, chunks.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < jobs; ++t) {
    threads.emplace_back([&] {
      try {
        work();
      } catch (...) {
        std::lock_guard lock(tally_mutex);
        if (!failure) failure = std::current_exception();
        next = chunks.size();
      }
    });
  }
  try {
    work();
  } catch (...) {
    std::lock_guard lock(tally_mutex);
    if (!failure) failure = std::current_exception();
    next = chunks.size();
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return report;
}

}  // namespace lexkit
