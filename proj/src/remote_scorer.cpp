#include "lexkit/remote_scorer.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstring>
#include <thread>

#include <httplib.h>
#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/mock_scorers.hpp"
#include "lexkit/run_header.hpp"

extern char** environ;

namespace lexkit {

using nlohmann::json;

namespace {

[[noreturn]] void raise_remote_error(const json& payload, int status) {
  std::string message = fmt::format("scorer returned status {}", status);
  if (payload.is_object() && payload.contains("error")) {
    const auto& err = payload["error"];
    message = err.is_object() ? err.value("message", message) : err.dump();
  }
  throw ProtocolError(message);
}

}  // namespace

HttpScorer::HttpScorer(std::string base_url, ClientOptions options)
    : base_url_(std::move(base_url)), options_(options),
      in_flight_(std::max(1, std::min(options.max_in_flight, 1024))) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

json HttpScorer::call(const std::string& method, const json* body) {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  auto backoff = options_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, options_.attempts); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(base_url_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    const std::string path = "/" + method;
    auto res = body ? client.Post(path, body->dump(), "application/json") : client.Get(path);
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    json payload = json::parse(res->body, nullptr, false);
    if (res->status != 200) raise_remote_error(payload, res->status);
    if (payload.is_discarded()) throw ProtocolError("scorer reply is not valid JSON");
    return payload;
  }
  throw ConnectionError(fmt::format("scorer {} unreachable after {} attempts: {}", base_url_,
                                    options_.attempts, last_error));
}

ScorerInfo HttpScorer::info() {
  std::lock_guard lock(info_mutex_);
  if (!info_) {
    auto info = info_from_json(call("info", nullptr));
    info.validate();
    info_ = std::move(info);
  }
  return *info_;
}

TokenizeResponse HttpScorer::tokenize(std::string_view text, TokenizeMode mode) {
  if (text.empty()) throw ProtocolError("tokenize: text must be non-empty");
  const json body = to_json(TokenizeRequest{std::string(text), mode});
  auto r = tokenize_response_from_json(call("tokenize", &body));
  validate_response(r);
  return r;
}

ScoreResponse HttpScorer::fill(const ScoreRequest& request) {
  validate_request(request, info());
  const json body = to_json(request);
  auto r = score_response_from_json(call("fill", &body));
  validate_response(r, static_cast<std::size_t>(request.num_masks), request.candidate_ids,
                    request.topk);
  return r;
}

ScoreResponse HttpScorer::fill_ids(const IdFillRequest& request) {
  validate_request(request, info());
  const json body = to_json(request);
  auto r = score_response_from_json(call("fill_ids", &body));
  validate_response(r, request.mask_positions.size(), request.candidate_ids, request.topk);
  return r;
}

StdioScorer::StdioScorer(const std::string& command) {
  // A child that dies mid-request must surface as EPIPE, not kill us.
  std::signal(SIGPIPE, SIG_IGN);
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0) {
    throw IoError(fmt::format("pipe failed: {}", std::strerror(errno)));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, to_child[1]);
  posix_spawn_file_actions_addclose(&actions, from_child[0]);
  std::string sh = "/bin/sh";
  std::string dash_c = "-c";
  std::string cmd = command;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
  const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  close(to_child[0]);
  close(from_child[1]);
  if (rc != 0) {
    close(to_child[1]);
    close(from_child[0]);
    throw IoError(fmt::format("cannot start scorer '{}': {}", command, std::strerror(rc)));
  }
  to_child_ = fdopen(to_child[1], "w");
  from_child_ = fdopen(from_child[0], "r");
}

StdioScorer::~StdioScorer() {
  if (to_child_) std::fclose(to_child_);
  if (from_child_) std::fclose(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

json StdioScorer::call(const std::string& method, const json& params) {
  std::lock_guard lock(mutex_);
  const std::uint64_t id = next_id_++;
  const std::string line =
      json{{"id", id}, {"method", method}, {"params", params}}.dump() + "\n";
  if (std::fputs(line.c_str(), to_child_) < 0 || std::fflush(to_child_) != 0) {
    throw ConnectionError("stdio scorer: write failed (child exited?)");
  }
  std::string reply;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, from_child_)) {
    reply += buf;
    if (!reply.empty() && reply.back() == '\n') break;
  }
  if (reply.empty()) throw ConnectionError("stdio scorer: child closed its output");
  const json envelope = json::parse(reply, nullptr, false);
  if (envelope.is_discarded() || !envelope.is_object()) {
    throw ProtocolError("stdio scorer: reply is not a JSON object");
  }
  if (envelope.value("id", json(nullptr)) != json(id)) {
    throw ProtocolError("stdio scorer: reply id does not match the request");
  }
  if (envelope.contains("error")) raise_remote_error(envelope, 400);
  if (!envelope.contains("result")) throw ProtocolError("stdio scorer: reply lacks a result");
  return envelope["result"];
}

ScorerInfo StdioScorer::info() {
  {
    std::lock_guard lock(mutex_);
    if (info_) return *info_;
  }
  auto info = info_from_json(call("info", json::object()));
  info.validate();
  std::lock_guard lock(mutex_);
  info_ = info;
  return info;
}

TokenizeResponse StdioScorer::tokenize(std::string_view text, TokenizeMode mode) {
  if (text.empty()) throw ProtocolError("tokenize: text must be non-empty");
  auto r = tokenize_response_from_json(
      call("tokenize", to_json(TokenizeRequest{std::string(text), mode})));
  validate_response(r);
  return r;
}

ScoreResponse StdioScorer::fill(const ScoreRequest& request) {
  validate_request(request, info());
  auto r = score_response_from_json(call("fill", to_json(request)));
  validate_response(r, static_cast<std::size_t>(request.num_masks), request.candidate_ids,
                    request.topk);
  return r;
}

ScoreResponse StdioScorer::fill_ids(const IdFillRequest& request) {
  validate_request(request, info());
  auto r = score_response_from_json(call("fill_ids", to_json(request)));
  validate_response(r, request.mask_positions.size(), request.candidate_ids, request.topk);
  return r;
}

namespace {

HashScorerConfig parse_hash_endpoint(std::string_view spec) {
  HashScorerConfig config;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    std::size_t end = spec.find(',', pos);
    if (end == std::string_view::npos) end = spec.size();
    const std::string_view item = spec.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(fmt::format("hash scorer option '{}' needs key=value", item));
    }
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    try {
      if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "vocab") {
        config.vocab_size = std::stoll(value);
      } else if (key == "max_tokens") {
        config.max_input_tokens = std::stoll(value);
      } else {
        throw ValidationError(fmt::format("unknown hash scorer option '{}'", key));
      }
    } catch (const std::logic_error&) {
      throw ValidationError(fmt::format("hash scorer option '{}' has a bad value", key));
    }
  }
  return config;
}

}  // namespace

std::unique_ptr<Scorer> make_scorer(std::string_view endpoint, ClientOptions options) {
  if (endpoint.starts_with("http://")) {
    return std::make_unique<HttpScorer>(std::string(endpoint), options);
  }
  if (endpoint.starts_with("https://")) {
    throw ValidationError("https endpoints are not supported; use http:// behind a proxy");
  }
  if (endpoint.starts_with("stdio:")) {
    return std::make_unique<StdioScorer>(std::string(endpoint.substr(6)));
  }
  if (endpoint.starts_with("hash:")) {
    return std::make_unique<HashScorer>(parse_hash_endpoint(endpoint.substr(5)));
  }
  if (endpoint == "hash") return std::make_unique<HashScorer>();
  if (endpoint.starts_with("table:")) {
    return std::make_unique<TableScorer>(TableScorerConfig::load(std::string(endpoint.substr(6))));
  }
  throw ValidationError(fmt::format(
      "unrecognized scorer endpoint '{}' (expected http://, stdio:, hash: or table:)", endpoint));
}

json describe_endpoint(std::string_view endpoint) {
  if (endpoint.starts_with("table:")) {
    return {{"kind", "table"}, {"config", describe_input(std::string(endpoint.substr(6)))}};
  }
  return std::string(endpoint);
}

}  // namespace lexkit
