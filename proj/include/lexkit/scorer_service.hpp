#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include <nlohmann/json.hpp>

#include "lexkit/scorer.hpp"

namespace httplib {
class Server;
}

namespace lexkit {

// Transport-independent dispatch of protocol methods ("info", "tokenize",
// "fill", "fill_ids") onto a Scorer.
class ScorerService {
 public:
  explicit ScorerService(Scorer& scorer) : scorer_(scorer) {}

  nlohmann::json handle(std::string_view method, const nlohmann::json& params);

 private:
  Scorer& scorer_;
};

// Error payload shared by both transports.
nlohmann::json error_payload(std::string_view kind, std::string_view message);

// Stdio framing: one JSON envelope per line,
//   request  {"id": n, "method": "...", "params": {...}}
//   response {"id": n, "result": {...}} or {"id": n, "error": {...}}
// Returns when `in` reaches end of file.
void serve_stdio(Scorer& scorer, std::istream& in, std::ostream& out);

// HTTP transport: GET /info, POST /tokenize, POST /fill, POST /fill_ids.
class HttpScorerServer {
 public:
  explicit HttpScorerServer(Scorer& scorer);
  ~HttpScorerServer();

  HttpScorerServer(const HttpScorerServer&) = delete;
  HttpScorerServer& operator=(const HttpScorerServer&) = delete;

  // Binds (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  ScorerService service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace lexkit
