#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kidlm {

// Decodes the UTF-8 sequence starting at `pos`; advances `pos` past it.
// Invalid bytes decode as U+FFFD and advance by one.
char32_t utf8_decode(std::string_view s, std::size_t& pos);

void utf8_append(std::string& out, char32_t cp);

bool is_unicode_space(char32_t cp);

// Punctuation for edge stripping: ASCII punctuation plus common typographic
// marks (curly quotes, dashes, ellipsis, guillemets).
bool is_strip_punct(char32_t cp);

bool contains_digit(std::string_view word);

// Lowercases ASCII and the Latin-1 letter range; other codepoints pass
// through unchanged.
std::string fold_lower(std::string_view s);

// Strips leading/trailing punctuation codepoints; internal characters kept.
std::string strip_edge_punct(std::string_view s);

// Unicode-whitespace split, then per-token edge-punctuation strip; empty
// results dropped. Case is preserved.
std::vector<std::string> word_segment(std::string_view text);

}  // namespace kidlm
