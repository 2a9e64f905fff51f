#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>

#include "kidlmforge/types.hpp"

namespace kidlm {

enum class Stratum { Stopword, DaleChall, Other };

const char* stratum_name(Stratum s);               // "stopword" | "dalechall" | "other"
Stratum stratum_from_name(std::string_view name);  // throws Error("bad-stratum")

// Lowercase, strip leading/trailing punctuation, keep internal apostrophes
// and hyphens; U+2019 maps to the ASCII apostrophe.
std::string normalize_word(std::string_view raw);

struct LexiconProvenance {
  std::string stopword_path;
  std::string dalechall_path;
  std::uint64_t stopword_digest = 0;  // FNV-1a over the raw file bytes
  std::uint64_t dalechall_digest = 0;
  std::size_t overlap_removed = 0;
};

struct StrataLexicon {
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> dalechall;  // post-overlap-removal
  LexiconProvenance provenance;
};

// Loads both word lists (one word per line, '#' comments ignored), applies
// normalize_word, and removes the stopword overlap from the Dale-Chall set.
// An unreadable or empty lexicon is a fatal configuration error.
StrataLexicon load_lexicons(const std::string& stopword_file,
                            const std::string& dalechall_file);

Stratum classify_word(std::string_view word, const StrataLexicon& lexicon);

struct StrataProportions {
  double stopword = 0;
  double dalechall = 0;
  double other = 0;
};

// Occurrence-weighted fractions over every word in the corpus.
// Throws Error("empty-corpus") when the corpus contains no words.
StrataProportions strata_proportions(const DocumentSet& docs,
                                     const StrataLexicon& lexicon);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace kidlm
