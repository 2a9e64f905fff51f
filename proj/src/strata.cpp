#include "kidlmforge/strata.hpp"

#include <fstream>
#include <sstream>

#include "kidlmforge/text.hpp"

namespace kidlm {

const char* stratum_name(Stratum s) {
  switch (s) {
    case Stratum::Stopword: return "stopword";
    case Stratum::DaleChall: return "dalechall";
    case Stratum::Other: return "other";
  }
  return "other";
}

Stratum stratum_from_name(std::string_view name) {
  if (name == "stopword") return Stratum::Stopword;
  if (name == "dalechall") return Stratum::DaleChall;
  if (name == "other") return Stratum::Other;
  throw Error("bad-stratum", "unknown stratum name: " + std::string(name));
}

std::string normalize_word(std::string_view raw) {
  std::string lowered = fold_lower(raw);
  // map typographic apostrophes before stripping so don’t == don't
  std::string mapped;
  mapped.reserve(lowered.size());
  std::size_t i = 0;
  while (i < lowered.size()) {
    char32_t cp = utf8_decode(lowered, i);
    if (cp == 0x2019 || cp == 0x2018) cp = U'\'';
    utf8_append(mapped, cp);
  }
  return strip_edge_punct(mapped);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace {

struct LoadedList {
  std::unordered_set<std::string> words;
  std::uint64_t digest = 0;
};

LoadedList load_word_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config", "cannot open lexicon file: " + path);
  std::ostringstream raw;
  raw << in.rdbuf();
  std::string contents = raw.str();

  LoadedList out;
  out.digest = fnv1a64(contents);
  std::istringstream lines(contents);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string word = normalize_word(line);
    if (!word.empty()) out.words.insert(std::move(word));
  }
  if (out.words.empty())
    throw Error("config", "lexicon file is empty: " + path);
  return out;
}

}  // namespace

StrataLexicon load_lexicons(const std::string& stopword_file,
                            const std::string& dalechall_file) {
  LoadedList stop = load_word_list(stopword_file);
  LoadedList dale = load_word_list(dalechall_file);

  StrataLexicon lex;
  lex.stopwords = std::move(stop.words);
  lex.provenance.stopword_path = stopword_file;
  lex.provenance.dalechall_path = dalechall_file;
  lex.provenance.stopword_digest = stop.digest;
  lex.provenance.dalechall_digest = dale.digest;

  // stopword wins on overlap
  for (auto& word : dale.words) {
    if (lex.stopwords.count(word)) {
      ++lex.provenance.overlap_removed;
    } else {
      lex.dalechall.insert(word);
    }
  }
  return lex;
}

Stratum classify_word(std::string_view word, const StrataLexicon& lexicon) {
  std::string w = normalize_word(word);
  if (w.empty() || contains_digit(w)) return Stratum::Other;
  if (lexicon.stopwords.count(w)) return Stratum::Stopword;
  if (lexicon.dalechall.count(w)) return Stratum::DaleChall;
  return Stratum::Other;
}

StrataProportions strata_proportions(const DocumentSet& docs,
                                     const StrataLexicon& lexicon) {
  std::size_t counts[3] = {0, 0, 0};
  std::size_t total = 0;
  for (const Document& doc : docs.docs) {
    for (const std::string& word : word_segment(doc.text)) {
      ++counts[static_cast<int>(classify_word(word, lexicon))];
      ++total;
    }
  }
  if (total == 0) throw Error("empty-corpus", "no words in corpus");
  StrataProportions p;
  p.stopword = static_cast<double>(counts[0]) / static_cast<double>(total);
  p.dalechall = static_cast<double>(counts[1]) / static_cast<double>(total);
  p.other = static_cast<double>(counts[2]) / static_cast<double>(total);
  return p;
}

}  // namespace kidlm
