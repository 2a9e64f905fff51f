#include "kidlmforge/text.hpp"

namespace kidlm {

char32_t utf8_decode(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) -> std::uint8_t {
    return static_cast<std::uint8_t>(s[i]);
  };
  std::uint8_t b0 = byte(pos);
  if (b0 < 0x80) {
    pos += 1;
    return b0;
  }
  auto cont = [&](std::size_t i) {
    return i < s.size() && (byte(i) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
    char32_t cp = (char32_t(b0 & 0x1F) << 6) | (byte(pos + 1) & 0x3F);
    pos += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
    char32_t cp = (char32_t(b0 & 0x0F) << 12) |
                  (char32_t(byte(pos + 1) & 0x3F) << 6) |
                  (byte(pos + 2) & 0x3F);
    pos += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
    char32_t cp = (char32_t(b0 & 0x07) << 18) |
                  (char32_t(byte(pos + 1) & 0x3F) << 12) |
                  (char32_t(byte(pos + 2) & 0x3F) << 6) |
                  (byte(pos + 3) & 0x3F);
    pos += 4;
    return cp;
  }
  pos += 1;
  return 0xFFFD;
}

void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\f':
    case U'\v':
    case 0x0085:
    case 0x00A0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_strip_punct(char32_t cp) {
  if (cp < 0x80) {
    char c = static_cast<char>(cp);
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
           (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
  }
  switch (cp) {
    case 0x2018:  // left single quote
    case 0x2019:  // right single quote
    case 0x201C:  // left double quote
    case 0x201D:  // right double quote
    case 0x2026:  // ellipsis
    case 0x2013:  // en dash
    case 0x2014:  // em dash
    case 0x00AB:  // left guillemet
    case 0x00BB:  // right guillemet
    case 0x00A1:  // inverted exclamation
    case 0x00BF:  // inverted question
      return true;
    default:
      return false;
  }
}

bool contains_digit(std::string_view word) {
  for (char c : word) {
    if (c >= '0' && c <= '9') return true;
  }
  return false;
}

std::string fold_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char32_t cp = utf8_decode(s, i);
    if (cp >= U'A' && cp <= U'Z') {
      cp += 32;
    } else if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) {
      cp += 32;  // Latin-1 uppercase letters
    }
    utf8_append(out, cp);
  }
  return out;
}

std::string strip_edge_punct(std::string_view s) {
  // decode once so edges are handled in codepoints, not bytes
  std::vector<std::pair<std::size_t, std::size_t>> cps;  // byte [begin,end)
  std::size_t i = 0;
  std::vector<char32_t> vals;
  while (i < s.size()) {
    std::size_t begin = i;
    char32_t cp = utf8_decode(s, i);
    cps.emplace_back(begin, i);
    vals.push_back(cp);
  }
  std::size_t lo = 0, hi = vals.size();
  while (lo < hi && is_strip_punct(vals[lo])) ++lo;
  while (hi > lo && is_strip_punct(vals[hi - 1])) --hi;
  if (lo >= hi) return {};
  return std::string(s.substr(cps[lo].first, cps[hi - 1].second - cps[lo].first));
}

std::vector<std::string> word_segment(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  std::size_t token_begin = 0;
  bool in_token = false;
  auto flush = [&](std::size_t end) {
    if (!in_token) return;
    std::string w = strip_edge_punct(text.substr(token_begin, end - token_begin));
    if (!w.empty()) words.push_back(std::move(w));
    in_token = false;
  };
  while (i < text.size()) {
    std::size_t begin = i;
    char32_t cp = utf8_decode(text, i);
    if (is_unicode_space(cp)) {
      flush(begin);
    } else if (!in_token) {
      in_token = true;
      token_begin = begin;
    }
  }
  flush(text.size());
  return words;
}

}  // namespace kidlm
