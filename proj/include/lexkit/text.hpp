#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lexkit {

constexpr bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Whitespace-delimited tokens. This is the tokenizer-agnostic count used
// for corpus statistics and for the #T / #T/L report columns.
std::vector<std::string_view> whitespace_tokens(std::string_view text);
std::size_t count_whitespace_tokens(std::string_view text);

std::string_view trim(std::string_view text);

// UTF-8 helpers. Invalid sequences decode byte-by-byte as U+FFFD.
char32_t decode_utf8(std::string_view text, std::size_t pos, std::size_t* len);
// Start offset of the code point that ends right before `pos`.
std::size_t previous_codepoint(std::string_view text, std::size_t pos);

// Word characters for whole-word matching: letters, digits, '_' and any
// non-ASCII code point outside the common Unicode space and punctuation
// blocks.
bool is_word_codepoint(char32_t cp);

bool is_word_boundary_before(std::string_view text, std::size_t pos);
bool is_word_boundary_after(std::string_view text, std::size_t pos);

std::string ascii_lower(std::string_view text);

struct TextSpan {
  std::size_t offset = 0;
  std::string_view text;
};

// Paragraphs are separated by one or more blank lines. Spans are trimmed and
// never empty.
std::vector<TextSpan> split_paragraphs(std::string_view text);

// Naive sentence splitter: breaks after '.', '!' or '?' followed by
// whitespace, and at newlines.
std::vector<std::string_view> split_sentences(std::string_view text);

}  // namespace lexkit
