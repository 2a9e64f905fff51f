#include "kidlmforge/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "kidlmforge/jsonl.hpp"
#include "kidlmforge/text.hpp"

namespace kidlm {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && static_cast<unsigned char>(s[b]) <= ' ') ++b;
  while (e > b && static_cast<unsigned char>(s[e - 1]) <= ' ') --e;
  return s.substr(b, e - b);
}

bool whitespace_only(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_unicode_space(utf8_decode(s, i))) return false;
  }
  return true;
}

}  // namespace

std::optional<int> parse_grade_level(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  // ranges like "K-1" or "4-5" map to the lower bound
  std::size_t dash = s.find('-');
  if (dash != std::string::npos) s = s.substr(0, dash);
  s = trim(s);
  if (s == "K" || s == "k") return 0;
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

IngestResult ingest_documents(std::istream& in,
                              const std::string& fallback_source) {
  IngestResult result;
  std::unordered_set<std::string> seen_ids;

  auto reject = [&](std::size_t line, std::string id, std::string reason) {
    result.rejects.push_back({line, std::move(id), std::move(reason)});
  };

  jsonl::for_each_record(
      in,
      [&](const jsonl::json& obj, std::size_t line) {
        std::string id;
        if (auto it = obj.find("id"); it != obj.end() && it->is_string())
          id = it->get<std::string>();
        if (id.empty()) return reject(line, "", "missing-field:id");

        auto text_it = obj.find("text");
        if (text_it == obj.end() || !text_it->is_string())
          return reject(line, id, "missing-field:text");
        std::string text = text_it->get<std::string>();
        if (whitespace_only(text)) return reject(line, id, "empty-text");

        std::string source = fallback_source;
        if (auto it = obj.find("source"); it != obj.end() && it->is_string())
          source = it->get<std::string>();
        if (source.empty()) return reject(line, id, "missing-field:source");

        Document doc;
        doc.id = id;
        doc.source = std::move(source);
        doc.text = std::move(text);

        if (auto it = obj.find("url"); it != obj.end() && !it->is_null()) {
          if (!it->is_string()) return reject(line, id, "bad-field:url");
          doc.url = it->get<std::string>();
        }
        if (auto it = obj.find("region"); it != obj.end() && !it->is_null()) {
          if (!it->is_string()) return reject(line, id, "bad-field:region");
          doc.region = it->get<std::string>();
        }
        if (auto it = obj.find("tags"); it != obj.end() && !it->is_null()) {
          if (!it->is_array()) return reject(line, id, "bad-field:tags");
          for (const auto& t : *it) {
            if (!t.is_string()) return reject(line, id, "bad-field:tags");
            doc.tags.push_back(t.get<std::string>());
          }
        }
        if (auto it = obj.find("grade_level");
            it != obj.end() && !it->is_null()) {
          std::optional<int> grade;
          if (it->is_number_integer()) {
            grade = it->get<int>();
          } else if (it->is_string()) {
            grade = parse_grade_level(it->get<std::string>());
            if (!grade) return reject(line, id, "bad-field:grade_level");
          } else {
            return reject(line, id, "bad-field:grade_level");
          }
          if (*grade < 0 || *grade > 12)
            return reject(line, id, "grade-out-of-range");
          doc.grade_level = grade;
        }

        if (!seen_ids.insert(doc.id).second)
          return reject(line, id, "duplicate-id");
        result.set.docs.push_back(std::move(doc));
      },
      [&](std::size_t line, const std::string& reason) {
        reject(line, "", reason);
      });
  return result;
}

namespace {

const char* const kBuiltinAbbreviations[] = {
    "mr",   "mrs",  "ms",   "dr",   "prof", "rev",   "hon",  "st",   "mt",
    "ft",   "sr",   "jr",   "gen",  "gov",  "sen",   "rep",  "sgt",  "capt",
    "lt",   "col",  "maj",  "cmdr", "pres", "supt",  "det",  "etc",  "e.g",
    "i.e",  "cf",   "vs",   "viz",  "al",   "fig",   "figs", "no",   "nos",
    "vol",  "vols", "ch",   "sec",  "pp",   "ed",    "eds",  "est",  "dept",
    "univ", "assn", "bros", "inc",  "ltd",  "co",    "corp", "ave",  "blvd",
    "rd",   "hwy",  "apt",  "jan",  "feb",  "mar",   "apr",  "jun",  "jul",
    "aug",  "sep",  "sept", "oct",  "nov",  "dec",   "mon",  "tue",  "tues",
    "wed",  "thu",  "thur", "thurs", "fri", "sat",   "sun",  "a.m",  "p.m",
    "u.s",  "u.k",  "u.n",  "d.c",  "b.c",  "a.d",   "ph.d", "m.d",  "b.a",
    "m.a",  "d.v.m", "approx", "dist", "min", "max", "sq",   "tel",  "ext"};

}  // namespace

const AbbreviationSet& default_abbreviations() {
  static const AbbreviationSet set = [] {
    AbbreviationSet s;
    for (const char* a : kBuiltinAbbreviations) s.insert(a);
    return s;
  }();
  return set;
}

AbbreviationSet load_abbreviations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open abbreviation file: " + path);
  AbbreviationSet set;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    set.insert(fold_lower(line));
  }
  return set;
}

namespace {

bool is_upper_or_digit(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return true;
  if (cp >= U'0' && cp <= U'9') return true;
  return cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7;  // Latin-1 uppercase
}

bool is_closing_quote(char32_t cp) {
  return cp == U'"' || cp == U'\'' || cp == 0x201D || cp == 0x2019 ||
         cp == U')' || cp == U']' || cp == 0x00BB;
}

bool is_opening_quote(char32_t cp) {
  return cp == U'"' || cp == U'\'' || cp == 0x201C || cp == 0x2018 ||
         cp == U'(' || cp == U'[' || cp == 0x00AB;
}

bool is_word_char(char32_t cp) {
  if (cp == U'.' || cp == U'\'' || cp == 0x2019) return true;
  if (cp >= U'0' && cp <= U'9') return true;
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
  return cp >= 0x00C0;  // treat non-ASCII letters as word characters
}

// Token ending right before byte `end`, lowercased, for the abbreviation
// guard. Trailing dots are not included; internal ones are ("e.g").
std::string token_before(const std::string& text, std::size_t end,
                         std::size_t* alpha_count) {
  // walk back over word characters
  std::size_t begin = end;
  while (begin > 0) {
    // find the previous codepoint start
    std::size_t prev = begin - 1;
    while (prev > 0 && (static_cast<unsigned char>(text[prev]) & 0xC0) == 0x80)
      --prev;
    std::size_t tmp = prev;
    char32_t cp = utf8_decode(text, tmp);
    if (!is_word_char(cp)) break;
    begin = prev;
  }
  std::string tok = text.substr(begin, end - begin);
  while (!tok.empty() && tok.back() == '.') tok.pop_back();
  std::size_t alphas = 0;
  for (char c : tok) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) ++alphas;
  }
  if (alpha_count) *alpha_count = alphas;
  return fold_lower(tok);
}

}  // namespace

std::vector<Sentence> segment_sentences(const Document& doc) {
  return segment_sentences(doc, default_abbreviations());
}

std::vector<Sentence> segment_sentences(const Document& doc,
                                        const AbbreviationSet& abbreviations) {
  const std::string& text = doc.text;
  std::vector<Sentence> sentences;
  auto emit = [&](std::size_t begin, std::size_t end) {
    std::string chunk = trim(text.substr(begin, end - begin));
    if (chunk.empty()) return;
    Sentence s;
    s.doc_id = doc.id;
    s.index = sentences.size();
    s.word_count = word_segment(chunk).size();
    s.text = std::move(chunk);
    sentences.push_back(std::move(s));
  };

  std::size_t sentence_begin = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t cp_begin = i;
    char32_t cp = utf8_decode(text, i);
    if (cp != U'.' && cp != U'!' && cp != U'?') continue;

    // consume the full terminator run
    std::size_t run_end = i;
    std::size_t dots = (cp == U'.') ? 1 : 0;
    std::size_t run_len = 1;
    while (run_end < text.size()) {
      std::size_t next = run_end;
      char32_t c2 = utf8_decode(text, next);
      if (c2 != U'.' && c2 != U'!' && c2 != U'?') break;
      if (c2 == U'.') ++dots;
      ++run_len;
      run_end = next;
    }

    // optional closing quotes directly after the terminators
    std::size_t close_end = run_end;
    while (close_end < text.size()) {
      std::size_t next = close_end;
      char32_t c2 = utf8_decode(text, next);
      if (!is_closing_quote(c2)) break;
      close_end = next;
    }

    // require whitespace, then optional opening quotes, then upper/digit
    std::size_t after_ws = close_end;
    bool saw_ws = false;
    while (after_ws < text.size()) {
      std::size_t next = after_ws;
      char32_t c2 = utf8_decode(text, next);
      if (!is_unicode_space(c2)) break;
      saw_ws = true;
      after_ws = next;
    }
    bool boundary = false;
    if (saw_ws && after_ws < text.size()) {
      std::size_t probe = after_ws;
      char32_t c2 = utf8_decode(text, probe);
      while (is_opening_quote(c2) && probe < text.size())
        c2 = utf8_decode(text, probe);
      boundary = is_upper_or_digit(c2);
    }

    if (boundary && run_len == 1 && dots == 1) {
      // abbreviation / initial guard applies to a lone period
      std::size_t alphas = 0;
      std::string tok = token_before(text, cp_begin, &alphas);
      if (!tok.empty() &&
          (alphas == 1 || abbreviations.count(tok) > 0)) {
        boundary = false;
      }
    }

    if (boundary) {
      emit(sentence_begin, close_end);
      sentence_begin = after_ws;
      i = after_ws;
    } else {
      i = run_end;
    }
  }
  emit(sentence_begin, text.size());
  return sentences;
}

namespace {

struct Accum {
  std::vector<double> sents_per_doc;
  std::vector<double> words_per_sent;
  std::size_t docs = 0, sents = 0, words = 0;
};

void finish(const Accum& a, SourceStats& out) {
  out.doc_count = a.docs;
  out.sentence_count = a.sents;
  out.word_count = a.words;
  auto mean_std = [](const std::vector<double>& xs)
      -> std::pair<std::optional<double>, std::optional<double>> {
    if (xs.empty()) return {std::nullopt, std::nullopt};
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());  // population
    return {mean, std::sqrt(var)};
  };
  std::tie(out.avg_sents_per_doc, out.std_sents_per_doc) =
      mean_std(a.sents_per_doc);
  std::tie(out.avg_words_per_sent, out.std_words_per_sent) =
      mean_std(a.words_per_sent);
}

}  // namespace

CorpusStats corpus_stats(const DocumentSet& docs) {
  return corpus_stats(docs, default_abbreviations());
}

CorpusStats corpus_stats(const DocumentSet& docs,
                         const AbbreviationSet& abbreviations) {
  std::map<std::string, Accum> per_source;
  Accum total;
  for (const Document& doc : docs.docs) {
    auto sentences = segment_sentences(doc, abbreviations);
    Accum& a = per_source[doc.source];
    a.docs += 1;
    total.docs += 1;
    a.sents_per_doc.push_back(static_cast<double>(sentences.size()));
    total.sents_per_doc.push_back(static_cast<double>(sentences.size()));
    for (const Sentence& s : sentences) {
      a.sents += 1;
      total.sents += 1;
      a.words += s.word_count;
      total.words += s.word_count;
      a.words_per_sent.push_back(static_cast<double>(s.word_count));
      total.words_per_sent.push_back(static_cast<double>(s.word_count));
    }
  }
  CorpusStats stats;
  for (auto& [source, accum] : per_source) finish(accum, stats.per_source[source]);
  finish(total, stats.aggregate);
  return stats;
}

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

void csv_row(std::string& out, const std::string& name, const SourceStats& s) {
  out += name;
  out += ',' + std::to_string(s.doc_count);
  out += ',' + std::to_string(s.sentence_count);
  out += ',' + fmt(s.avg_sents_per_doc);
  out += ',' + fmt(s.std_sents_per_doc);
  out += ',' + fmt(s.avg_words_per_sent);
  out += ',' + fmt(s.std_words_per_sent);
  out += '\n';
}

}  // namespace

std::string stats_to_csv(const CorpusStats& stats) {
  std::string out = "source,docs,sents,avg_sents,std_sents,avg_words,std_words\n";
  for (const auto& [source, s] : stats.per_source) csv_row(out, source, s);
  csv_row(out, "ALL", stats.aggregate);
  return out;
}

std::string stats_to_markdown(const CorpusStats& stats) {
  std::string out =
      "| source | docs | sents | avg_sents | std_sents | avg_words | "
      "std_words |\n|---|---|---|---|---|---|---|\n";
  auto row = [&](const std::string& name, const SourceStats& s) {
    out += "| " + name + " | " + std::to_string(s.doc_count) + " | " +
           std::to_string(s.sentence_count) + " | " + fmt(s.avg_sents_per_doc) +
           " | " + fmt(s.std_sents_per_doc) + " | " +
           fmt(s.avg_words_per_sent) + " | " + fmt(s.std_words_per_sent) +
           " |\n";
  };
  for (const auto& [source, s] : stats.per_source) row(source, s);
  row("ALL", stats.aggregate);
  return out;
}

}  // namespace kidlm
