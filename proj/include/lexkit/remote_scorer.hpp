#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lexkit/scorer.hpp"

namespace lexkit {

struct ClientOptions {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{100};  // doubled per retry
  int max_in_flight = 8;
  std::chrono::seconds timeout{60};
};

// HTTP+JSON client. Connection failures are retried with exponential
// backoff; protocol errors (4xx) are not. info() is fetched once and cached.
class HttpScorer final : public Scorer {
 public:
  explicit HttpScorer(std::string base_url, ClientOptions options = {});

  ScorerInfo info() override;
  TokenizeResponse tokenize(std::string_view text, TokenizeMode mode) override;
  ScoreResponse fill(const ScoreRequest& request) override;
  ScoreResponse fill_ids(const IdFillRequest& request) override;

 private:
  nlohmann::json call(const std::string& method, const nlohmann::json* body);

  std::string base_url_;
  ClientOptions options_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex info_mutex_;
  std::optional<ScorerInfo> info_;
};

// Talks to a child process over stdin/stdout using the line-delimited
// envelope framing. Requests are serialized; replies are matched by id.
class StdioScorer final : public Scorer {
 public:
  explicit StdioScorer(const std::string& command);
  ~StdioScorer() override;

  StdioScorer(const StdioScorer&) = delete;
  StdioScorer& operator=(const StdioScorer&) = delete;

  ScorerInfo info() override;
  TokenizeResponse tokenize(std::string_view text, TokenizeMode mode) override;
  ScoreResponse fill(const ScoreRequest& request) override;
  ScoreResponse fill_ids(const IdFillRequest& request) override;

 private:
  nlohmann::json call(const std::string& method, const nlohmann::json& params);

  std::mutex mutex_;
  int pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
  std::uint64_t next_id_ = 1;
  std::optional<ScorerInfo> info_;
};

// Builds a scorer from an endpoint string:
//   http://host:port          remote service
//   stdio:<command>           child process speaking the stdio framing
//   hash:seed=7,vocab=1000    in-process hash scorer (also max_tokens=)
//   table:<config.json>       in-process table scorer
std::unique_ptr<Scorer> make_scorer(std::string_view endpoint, ClientOptions options = {});

// Canonical description of an endpoint for run headers.
nlohmann::json describe_endpoint(std::string_view endpoint);

}  // namespace lexkit
