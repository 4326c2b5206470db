#include "lexkit/chunking.hpp"

#include <fmt/format.h>

#include "lexkit/error.hpp"
#include "lexkit/text.hpp"

namespace lexkit {

std::vector<std::string> chunk_text(std::string_view text, std::size_t window_chars) {
  if (window_chars < kMinWindowChars) {
    throw ValidationError(
        fmt::format("window_chars must be >= {}, got {}", kMinWindowChars, window_chars));
  }
  std::vector<std::string> chunks;
  std::string current;
  for (std::string_view word : whitespace_tokens(text)) {
    const std::size_t extra = current.empty() ? word.size() : word.size() + 1;
    if (!current.empty() && current.size() + extra > window_chars) {
      chunks.push_back(std::move(current));
      current.clear();
    }
    if (!current.empty()) current += ' ';
    current += word;
  }
  if (!current.empty()) chunks.push_back(std::move(current));
  return chunks;
}

std::optional<SplitFilter> parse_split_filter(std::string_view name) {
  if (name == "any" || name == "all") return SplitFilter::any;
  if (name == "train") return SplitFilter::train;
  if (name == "test") return SplitFilter::test;
  return std::nullopt;
}

std::optional<SamplingUnit> parse_sampling_unit(std::string_view name) {
  if (name == "document") return SamplingUnit::document;
  if (name == "chunk") return SamplingUnit::chunk;
  if (name == "sentence") return SamplingUnit::sentence;
  return std::nullopt;
}

bool accepts(SplitFilter filter, Split split) {
  switch (filter) {
    case SplitFilter::any: return true;
    case SplitFilter::train: return split == Split::train;
    case SplitFilter::test: return split == Split::test;
  }
  return false;
}

std::vector<std::string> split_units(std::string_view text, const ChunkOptions& options) {
  switch (options.unit) {
    case SamplingUnit::document:
      return {std::string(trim(text))};
    case SamplingUnit::sentence: {
      std::vector<std::string> out;
      for (auto s : split_sentences(text)) out.emplace_back(s);
      return out;
    }
    case SamplingUnit::chunk:
      break;
  }
  return chunk_text(text, options.window_chars);
}

SubcorpusChunkStream::SubcorpusChunkStream(DocumentReader reader, ChunkOptions options)
    : reader_(std::move(reader)), options_(options) {
  if (options_.unit == SamplingUnit::chunk && options_.window_chars < kMinWindowChars) {
    throw ValidationError(fmt::format("window_chars must be >= {}", kMinWindowChars));
  }
}

std::optional<Chunk> SubcorpusChunkStream::next() {
  while (pending_.empty()) {
    auto rec = reader_.next();
    if (!rec) return std::nullopt;
    if (!accepts(options_.filter, rec->split)) continue;
    std::size_t index = 0;
    for (auto& unit : split_units(rec->text, options_)) {
      pending_.push_back(Chunk{rec->subcorpus_id, rec->doc_id, index++, std::move(unit)});
    }
  }
  Chunk out = std::move(pending_.front());
  pending_.pop_front();
  return out;
}

void SubcorpusChunkStream::rewind() {
  pending_.clear();
  reader_.rewind();
}

VectorChunkSource::VectorChunkSource(std::string id, std::vector<std::string> units)
    : id_(std::move(id)), units_(std::move(units)) {}

std::optional<Chunk> VectorChunkSource::next() {
  if (pos_ >= units_.size()) return std::nullopt;
  const std::size_t i = pos_++;
  return Chunk{id_, fmt::format("{}-{}", id_, i), 0, units_[i]};
}

std::vector<std::unique_ptr<ChunkSource>> open_chunk_streams(const Corpus& corpus,
                                                             const ChunkOptions& options) {
  std::vector<std::unique_ptr<ChunkSource>> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out.push_back(std::make_unique<SubcorpusChunkStream>(corpus.open(i), options));
  }
  return out;
}

}  // namespace lexkit
