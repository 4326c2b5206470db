#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexkit/corpus.hpp"
#include "lexkit/error.hpp"
#include "lexkit/run_header.hpp"
#include "lexkit/scorer.hpp"

namespace lexkit::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lexkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct FixtureDoc {
  std::string id;
  std::string text;
  std::string split;  // empty: not given
};

inline std::string jsonl_of(const std::vector<FixtureDoc>& docs) {
  std::string out;
  for (const auto& d : docs) {
    nlohmann::json obj{{"id", d.id}, {"text", d.text}};
    if (!d.split.empty()) obj["split"] = d.split;
    out += obj.dump() + "\n";
  }
  return out;
}

// Writes one JSONL file per sub-corpus plus a manifest; returns its path.
inline std::filesystem::path write_corpus(
    const TempDir& dir, const std::vector<std::pair<std::string, std::vector<FixtureDoc>>>& subs) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [id, docs] : subs) {
    write_file(dir / (id + ".jsonl"), jsonl_of(docs));
    entries.push_back({{"subcorpus_id", id}, {"path", id + ".jsonl"}});
  }
  const auto manifest = dir / "manifest.json";
  write_file(manifest, nlohmann::json{{"version", "t"}, {"entries", entries}}.dump(2));
  return manifest;
}

// Scorer driven by callbacks; unset callbacks raise ProtocolError.
class FakeScorer : public Scorer {
 public:
  ScorerInfo info_value{"fake", 100, "<mask>", 512, {}};
  std::function<TokenizeResponse(std::string_view, TokenizeMode)> on_tokenize;
  std::function<ScoreResponse(const ScoreRequest&)> on_fill;
  std::function<ScoreResponse(const IdFillRequest&)> on_fill_ids;

  ScorerInfo info() override { return info_value; }
  TokenizeResponse tokenize(std::string_view text, TokenizeMode mode) override {
    if (!on_tokenize) throw ProtocolError("tokenize not supported");
    return on_tokenize(text, mode);
  }
  ScoreResponse fill(const ScoreRequest& r) override {
    if (!on_fill) throw ProtocolError("fill not supported");
    return on_fill(r);
  }
  ScoreResponse fill_ids(const IdFillRequest& r) override {
    if (!on_fill_ids) throw ProtocolError("fill_ids not supported");
    return on_fill_ids(r);
  }
};

}  // namespace lexkit::testing
