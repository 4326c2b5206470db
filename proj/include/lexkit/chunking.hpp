#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexkit/corpus.hpp"

namespace lexkit {

inline constexpr std::size_t kMinWindowChars = 200;

// Greedy whitespace packing: words are joined by single spaces into chunks of
// at most `window_chars` bytes. A single word longer than the window becomes
// its own oversized chunk so the word sequence is never altered.
std::vector<std::string> chunk_text(std::string_view text, std::size_t window_chars);

enum class SplitFilter { any, train, test };
enum class SamplingUnit { document, chunk, sentence };

std::optional<SplitFilter> parse_split_filter(std::string_view name);
std::optional<SamplingUnit> parse_sampling_unit(std::string_view name);

bool accepts(SplitFilter filter, Split split);

struct Chunk {
  std::string subcorpus_id;
  std::string doc_id;
  std::size_t index = 0;  // position within the document
  std::string text;
};

// A restartable stream of units from one source.
class ChunkSource {
 public:
  virtual ~ChunkSource() = default;
  virtual std::optional<Chunk> next() = 0;
  virtual void rewind() = 0;
  virtual const std::string& id() const = 0;
};

struct ChunkOptions {
  std::size_t window_chars = 1000;
  SplitFilter filter = SplitFilter::any;
  SamplingUnit unit = SamplingUnit::chunk;
};

// File-backed units of one sub-corpus.
class SubcorpusChunkStream final : public ChunkSource {
 public:
  SubcorpusChunkStream(DocumentReader reader, ChunkOptions options);

  std::optional<Chunk> next() override;
  void rewind() override;
  const std::string& id() const override { return reader_.entry().subcorpus_id; }
  const DocumentReader& reader() const { return reader_; }

 private:
  DocumentReader reader_;
  ChunkOptions options_;
  std::deque<Chunk> pending_;
};

// In-memory source, mostly for tests and small fixtures.
class VectorChunkSource final : public ChunkSource {
 public:
  VectorChunkSource(std::string id, std::vector<std::string> units);

  std::optional<Chunk> next() override;
  void rewind() override { pos_ = 0; }
  const std::string& id() const override { return id_; }

 private:
  std::string id_;
  std::vector<std::string> units_;
  std::size_t pos_ = 0;
};

std::vector<std::unique_ptr<ChunkSource>> open_chunk_streams(const Corpus& corpus,
                                                             const ChunkOptions& options);

std::vector<std::string> split_units(std::string_view text, const ChunkOptions& options);

}  // namespace lexkit
