#include "lexkit/sampler.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lexkit/error.hpp"

namespace lexkit {

nlohmann::json SamplingPlan::to_json() const {
  nlohmann::json out = {{"alpha", alpha}, {"shares", shares}, {"rates", rates}};
  if (!subcorpus_ids.empty()) out["subcorpora"] = subcorpus_ids;
  return out;
}

SamplingPlan smoothed_rates(std::span<const double> weights, double alpha) {
  if (weights.empty()) throw ValidationError("smoothed_rates needs at least one share");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError(fmt::format("alpha must lie in [0, 1], got {}", alpha));
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError(fmt::format("shares must be positive and finite, got {}", w));
    }
    total += w;
  }
  SamplingPlan plan;
  plan.alpha = alpha;
  plan.shares.reserve(weights.size());
  for (double w : weights) plan.shares.push_back(w / total);

  // Powers of the normalized shares; the common factor total^alpha cancels.
  double z = 0.0;
  plan.rates.reserve(weights.size());
  for (double s : plan.shares) {
    const double p = std::pow(s, alpha);
    plan.rates.push_back(p);
    z += p;
  }
  for (double& r : plan.rates) r /= z;
  return plan;
}

SampleStream::SampleStream(std::vector<std::unique_ptr<ChunkSource>> sources,
                           SamplingPlan plan, std::uint64_t seed)
    : sources_(std::move(sources)),
      plan_(std::move(plan)),
      rng_(seed),
      wraps_(sources_.size(), 0),
      dead_(sources_.size(), false) {
  if (sources_.empty()) throw ValidationError("sample stream needs at least one source");
  if (plan_.rates.size() != sources_.size()) {
    throw ValidationError(fmt::format("plan has {} rates for {} sources", plan_.rates.size(),
                                      sources_.size()));
  }
  rebuild_cumulative();
}

std::size_t SampleStream::live_sources() const {
  return static_cast<std::size_t>(std::count(dead_.begin(), dead_.end(), false));
}

void SampleStream::rebuild_cumulative() {
  cumulative_.assign(sources_.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    if (!dead_[i]) acc += plan_.rates[i];
    cumulative_[i] = acc;
  }
  if (!(acc > 0.0)) throw ValidationError("all sampling streams are empty");
  for (double& c : cumulative_) c /= acc;
}

std::size_t SampleStream::pick() {
  const double u = rng_.uniform01();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t i = it == cumulative_.end() ? sources_.size() - 1
                                          : static_cast<std::size_t>(it - cumulative_.begin());
  // Skip retired sources that share the same cumulative value.
  while (dead_[i] && i + 1 < sources_.size()) ++i;
  while (dead_[i] && i > 0) --i;
  return i;
}

SampleStream::Draw SampleStream::next() {
  for (;;) {
    const std::size_t i = pick();
    if (auto chunk = sources_[i]->next()) return Draw{i, std::move(*chunk)};
    sources_[i]->rewind();
    if (auto chunk = sources_[i]->next()) {
      ++wraps_[i];
      return Draw{i, std::move(*chunk)};
    }
    dead_[i] = true;
    rebuild_cumulative();
  }
}

}  // namespace lexkit
