#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "kidlmforge/types.hpp"

namespace kidlm {

struct RejectedRecord {
  std::size_t line = 0;
  std::string id;  // empty when the record had none
  std::string reason;
};

struct IngestResult {
  DocumentSet set;
  std::vector<RejectedRecord> rejects;
};

// Parses line-delimited document records (see README for the schema).
// Malformed records are tallied, not fatal. `fallback_source` fills in the
// `source` field for records that lack one; if both are absent the record
// is rejected.
IngestResult ingest_documents(std::istream& in,
                              const std::string& fallback_source = "");

// Grade fields may arrive as an integer or as a range string such as
// "K-1" or "4-5"; ranges map to their lower bound with K encoded as 0.
std::optional<int> parse_grade_level(const std::string& raw);

using AbbreviationSet = std::unordered_set<std::string>;

const AbbreviationSet& default_abbreviations();
AbbreviationSet load_abbreviations(const std::string& path);

// Rule-based splitter: a run of .?! followed by optional closing quotes,
// whitespace, optional opening quotes, then an uppercase letter or digit
// ends a sentence, unless the token before a '.' is a known abbreviation
// or a single-letter initial.
std::vector<Sentence> segment_sentences(const Document& doc);
std::vector<Sentence> segment_sentences(const Document& doc,
                                        const AbbreviationSet& abbreviations);

struct SourceStats {
  std::size_t doc_count = 0;
  std::size_t sentence_count = 0;
  std::size_t word_count = 0;
  std::optional<double> avg_sents_per_doc;
  std::optional<double> std_sents_per_doc;  // population std-dev
  std::optional<double> avg_words_per_sent;
  std::optional<double> std_words_per_sent;
};

struct CorpusStats {
  std::map<std::string, SourceStats> per_source;
  SourceStats aggregate;
};

CorpusStats corpus_stats(const DocumentSet& docs);
CorpusStats corpus_stats(const DocumentSet& docs,
                         const AbbreviationSet& abbreviations);

// Columns: source,docs,sents,avg_sents,std_sents,avg_words,std_words.
// The aggregate appears as a final "ALL" row. Absent averages print empty.
std::string stats_to_csv(const CorpusStats& stats);
std::string stats_to_markdown(const CorpusStats& stats);

}  // namespace kidlm
