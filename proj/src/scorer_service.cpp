#include "lexkit/scorer_service.hpp"

#include <istream>
#include <ostream>

#include <httplib.h>
#include <fmt/format.h>

#include "lexkit/error.hpp"

namespace lexkit {

using nlohmann::json;

json error_payload(std::string_view kind, std::string_view message) {
  return {{"kind", kind}, {"message", message}};
}

json ScorerService::handle(std::string_view method, const json& params) {
  if (method == "info") return to_json(scorer_.info());
  if (method == "tokenize") {
    const auto req = tokenize_request_from_json(params);
    return to_json(scorer_.tokenize(req.text, req.mode));
  }
  if (method == "fill") return to_json(scorer_.fill(score_request_from_json(params)));
  if (method == "fill_ids") return to_json(scorer_.fill_ids(id_fill_request_from_json(params)));
  throw ProtocolError(fmt::format("unknown method '{}'", method));
}

void serve_stdio(Scorer& scorer, std::istream& in, std::ostream& out) {
  ScorerService service(scorer);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json reply;
    const json envelope = json::parse(line, nullptr, false);
    if (envelope.is_discarded() || !envelope.is_object()) {
      reply = {{"id", nullptr}, {"error", error_payload("protocol", "invalid JSON envelope")}};
    } else {
      reply["id"] = envelope.value("id", json(nullptr));
      try {
        reply["result"] = service.handle(envelope.value("method", ""),
                                         envelope.value("params", json::object()));
      } catch (const ProtocolError& e) {
        reply["error"] = error_payload("protocol", e.what());
      } catch (const std::exception& e) {
        reply["error"] = error_payload("internal", e.what());
      }
    }
    out << reply.dump() << '\n' << std::flush;
  }
}

HttpScorerServer::HttpScorerServer(Scorer& scorer)
    : service_(scorer), server_(std::make_unique<httplib::Server>()) {
  const auto respond = [this](std::string_view method, const httplib::Request& req,
                              httplib::Response& res) {
    try {
      json params = json::object();
      if (!req.body.empty()) {
        params = json::parse(req.body, nullptr, false);
        if (params.is_discarded()) throw ProtocolError("request body is not valid JSON");
      }
      res.set_content(service_.handle(method, params).dump(), "application/json");
    } catch (const ProtocolError& e) {
      res.status = 400;
      res.set_content(json{{"error", error_payload("protocol", e.what())}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", error_payload("internal", e.what())}}.dump(),
                      "application/json");
    }
  };
  server_->Get("/info", [respond](const httplib::Request& req, httplib::Response& res) {
    respond("info", req, res);
  });
  for (const char* method : {"tokenize", "fill", "fill_ids"}) {
    server_->Post(fmt::format("/{}", method),
                  [respond, method](const httplib::Request& req, httplib::Response& res) {
                    respond(method, req, res);
                  });
  }
}

HttpScorerServer::~HttpScorerServer() { stop(); }

int HttpScorerServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError(fmt::format("cannot bind {}:{}", host, port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

bool HttpScorerServer::listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

void HttpScorerServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace lexkit
