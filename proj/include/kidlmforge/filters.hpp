#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kidlmforge/types.hpp"

namespace kidlm {

struct LanguageVerdict {
  std::string language;  // ISO-639-1 code
  double confidence = 0; // in [0, 1]
};

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual LanguageVerdict detect(std::string_view text) const = 0;
};

struct FilterReport {
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> drop_reasons;
  std::map<std::string, std::size_t> redactions;

  // associative + commutative, so partial reports can merge in any order
  void merge(const FilterReport& other);
};

// Keeps a sentence iff the detector says "en" with confidence >= threshold
// (inclusive). Drops tally as "non-english" or "low-confidence".
std::pair<std::vector<Sentence>, FilterReport> filter_language(
    const std::vector<Sentence>& sentences, const LanguageDetector& detector,
    double threshold);

struct ScrubResult {
  std::string text;
  std::map<std::string, std::size_t> counts;  // email / phone / handle
};

// Replaces email, phone, and handle matches with [EMAIL], [PHONE], [HANDLE].
ScrubResult scrub_pii(std::string_view text);

struct QualityRule {
  enum class Kind { TagAllowlist, TagDenylist, GradeCap, TrafficLightExclude };
  Kind kind = Kind::TagAllowlist;
  std::vector<std::string> tags;    // allow/deny/exclude lists
  int max_grade = 12;               // GradeCap only, in [0, 12]

  static const char* kind_name(Kind k);
  static Kind kind_from_name(std::string_view name);
};

// Parses a JSON array of {"kind": ..., "params": {...}} objects.
std::vector<QualityRule> parse_quality_rules(const std::string& json_text);
std::vector<QualityRule> load_quality_rules(const std::string& path);

struct RuleVerdict {
  bool keep = true;
  std::optional<std::string> failed_rule;  // kind name of the first failure
};

// Rules are evaluated in list order; an empty list keeps everything.
RuleVerdict apply_quality_rules(const Document& doc,
                                const std::vector<QualityRule>& rules);

struct DocumentFilterOutcome {
  DocumentSet kept;
  FilterReport doc_report;       // per-document keep/drop
  FilterReport sentence_report;  // per-sentence keep/drop + PII redactions
};

// Full document pipeline: quality rules, per-sentence language filter, PII
// scrub, then reassembly; documents whose every sentence dropped are removed.
DocumentFilterOutcome filter_documents(const DocumentSet& docs,
                                       const std::vector<QualityRule>& rules,
                                       const LanguageDetector& detector,
                                       double threshold);

}  // namespace kidlm
