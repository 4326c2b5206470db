#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexkit/chunking.hpp"
#include "lexkit/random.hpp"

namespace lexkit {

// Exponentially smoothed sub-corpus sampling rates:
//   rate_i = share_i^alpha / sum_j share_j^alpha
struct SamplingPlan {
  std::vector<std::string> subcorpus_ids;  // optional labels, parallel to shares
  std::vector<double> shares;              // normalized to sum to 1
  double alpha = 0.5;
  std::vector<double> rates;

  nlohmann::json to_json() const;
};

inline constexpr double kDefaultAlpha = 0.5;

// `weights` may be shares or raw token counts; they are renormalized. Every
// weight must be positive and finite, alpha must lie in [0, 1].
SamplingPlan smoothed_rates(std::span<const double> weights, double alpha);

// Interleaves units from several sources. At each draw the source is picked
// i.i.d. with its rate; an exhausted source restarts from its beginning and
// bumps its wrap counter. A source that stays empty after a restart is
// retired and the draw is repeated over the remaining ones.
class SampleStream {
 public:
  struct Draw {
    std::size_t source = 0;
    Chunk chunk;
  };

  SampleStream(std::vector<std::unique_ptr<ChunkSource>> sources, SamplingPlan plan,
               std::uint64_t seed);

  Draw next();

  const std::vector<std::size_t>& wraps() const { return wraps_; }
  const SamplingPlan& plan() const { return plan_; }
  std::size_t live_sources() const;

 private:
  void rebuild_cumulative();
  std::size_t pick();

  std::vector<std::unique_ptr<ChunkSource>> sources_;
  SamplingPlan plan_;
  Rng rng_;
  std::vector<std::size_t> wraps_;
  std::vector<bool> dead_;
  std::vector<double> cumulative_;
};

}  // namespace lexkit
