#include "kidlmforge/filters.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "kidlmforge/corpus.hpp"
#include "kidlmforge/text.hpp"

namespace kidlm {

void FilterReport::merge(const FilterReport& other) {
  kept += other.kept;
  dropped += other.dropped;
  for (const auto& [reason, n] : other.drop_reasons) drop_reasons[reason] += n;
  for (const auto& [category, n] : other.redactions) redactions[category] += n;
}

std::pair<std::vector<Sentence>, FilterReport> filter_language(
    const std::vector<Sentence>& sentences, const LanguageDetector& detector,
    double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw Error("config", "language threshold must be in [0,1]");
  std::vector<Sentence> kept;
  FilterReport report;
  for (const Sentence& s : sentences) {
    LanguageVerdict v = detector.detect(s.text);
    if (v.language != "en") {
      report.dropped++;
      report.drop_reasons["non-english"]++;
    } else if (v.confidence < threshold) {
      report.dropped++;
      report.drop_reasons["low-confidence"]++;
    } else {
      report.kept++;
      kept.push_back(s);
    }
  }
  return {std::move(kept), std::move(report)};
}

namespace {

// Patterns are part of the published interface; keep them byte-for-byte.
const std::regex& email_re() {
  static const std::regex re(
      R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
  return re;
}
const std::regex& phone_re() {
  static const std::regex re(
      R"((\+?\d{1,3}[\s.-]?)?(\(?\d{3}\)?[\s.-]?)\d{3}[\s.-]?\d{4})");
  return re;
}
const std::regex& handle_re() {
  static const std::regex re(R"(@[A-Za-z0-9_]{2,15})");
  return re;
}

std::size_t replace_all(std::string& text, const std::regex& re,
                        const std::string& placeholder) {
  std::string out;
  std::size_t count = 0;
  auto begin = std::sregex_iterator(text.begin(), text.end(), re);
  auto end = std::sregex_iterator();
  std::size_t last = 0;
  for (auto it = begin; it != end; ++it) {
    out.append(text, last, static_cast<std::size_t>(it->position()) - last);
    out += placeholder;
    last = static_cast<std::size_t>(it->position() + it->length());
    ++count;
  }
  out.append(text, last, text.size() - last);
  text = std::move(out);
  return count;
}

}  // namespace

ScrubResult scrub_pii(std::string_view text) {
  ScrubResult r;
  r.text = std::string(text);
  // emails first so the handle pattern cannot eat their @domain part
  r.counts["email"] = replace_all(r.text, email_re(), "[EMAIL]");
  r.counts["phone"] = replace_all(r.text, phone_re(), "[PHONE]");
  r.counts["handle"] = replace_all(r.text, handle_re(), "[HANDLE]");
  return r;
}

const char* QualityRule::kind_name(Kind k) {
  switch (k) {
    case Kind::TagAllowlist: return "tag-allowlist";
    case Kind::TagDenylist: return "tag-denylist";
    case Kind::GradeCap: return "grade-cap";
    case Kind::TrafficLightExclude: return "traffic-light-exclude";
  }
  return "tag-allowlist";
}

QualityRule::Kind QualityRule::kind_from_name(std::string_view name) {
  if (name == "tag-allowlist") return Kind::TagAllowlist;
  if (name == "tag-denylist") return Kind::TagDenylist;
  if (name == "grade-cap") return Kind::GradeCap;
  if (name == "traffic-light-exclude") return Kind::TrafficLightExclude;
  throw Error("config", "unknown quality rule kind: " + std::string(name));
}

std::vector<QualityRule> parse_quality_rules(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array())
    throw Error("config", "rule file must be a JSON array");
  std::vector<QualityRule> rules;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("kind"))
      throw Error("config", "each rule needs a \"kind\"");
    QualityRule rule;
    rule.kind = QualityRule::kind_from_name(entry["kind"].get<std::string>());
    nlohmann::json params =
        entry.contains("params") ? entry["params"] : nlohmann::json::object();
    if (rule.kind == QualityRule::Kind::GradeCap) {
      if (!params.contains("max_grade") ||
          !params["max_grade"].is_number_integer())
        throw Error("config", "grade-cap needs integer params.max_grade");
      rule.max_grade = params["max_grade"].get<int>();
      if (rule.max_grade < 0 || rule.max_grade > 12)
        throw Error("config", "grade-cap max_grade must be in [0,12]");
    } else {
      const char* key =
          rule.kind == QualityRule::Kind::TrafficLightExclude ? "colors"
                                                              : "tags";
      if (params.contains(key) && params[key].is_array()) {
        for (const auto& t : params[key])
          rule.tags.push_back(fold_lower(t.get<std::string>()));
      }
      if (rule.tags.empty())
        throw Error("config", std::string("rule needs non-empty params.") + key);
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<QualityRule> load_quality_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open rule file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_quality_rules(ss.str());
}

namespace {

bool has_tag(const Document& doc, const std::vector<std::string>& wanted,
             bool traffic_light) {
  for (const std::string& raw : doc.tags) {
    std::string tag = fold_lower(raw);
    for (const std::string& w : wanted) {
      if (tag == w) return true;
      if (traffic_light && tag == "traffic-light:" + w) return true;
    }
  }
  return false;
}

}  // namespace

RuleVerdict apply_quality_rules(const Document& doc,
                                const std::vector<QualityRule>& rules) {
  for (const QualityRule& rule : rules) {
    bool ok = true;
    switch (rule.kind) {
      case QualityRule::Kind::TagAllowlist:
        ok = has_tag(doc, rule.tags, false);
        break;
      case QualityRule::Kind::TagDenylist:
        ok = !has_tag(doc, rule.tags, false);
        break;
      case QualityRule::Kind::GradeCap:
        // a missing grade passes; the cap only applies where data exists
        ok = !doc.grade_level || *doc.grade_level <= rule.max_grade;
        break;
      case QualityRule::Kind::TrafficLightExclude:
        ok = !has_tag(doc, rule.tags, true);
        break;
    }
    if (!ok) return {false, QualityRule::kind_name(rule.kind)};
  }
  return {true, std::nullopt};
}

DocumentFilterOutcome filter_documents(const DocumentSet& docs,
                                       const std::vector<QualityRule>& rules,
                                       const LanguageDetector& detector,
                                       double threshold) {
  DocumentFilterOutcome out;
  for (const Document& doc : docs.docs) {
    RuleVerdict verdict = apply_quality_rules(doc, rules);
    if (!verdict.keep) {
      out.doc_report.dropped++;
      out.doc_report.drop_reasons[*verdict.failed_rule]++;
      continue;
    }
    auto sentences = segment_sentences(doc);
    auto [kept_sents, lang_report] =
        filter_language(sentences, detector, threshold);
    out.sentence_report.merge(lang_report);
    if (kept_sents.empty()) {
      out.doc_report.dropped++;
      out.doc_report.drop_reasons["no-english-sentences"]++;
      continue;
    }
    std::string rebuilt;
    for (Sentence& s : kept_sents) {
      ScrubResult scrubbed = scrub_pii(s.text);
      for (const auto& [category, n] : scrubbed.counts)
        out.sentence_report.redactions[category] += n;
      if (!rebuilt.empty()) rebuilt += ' ';
      rebuilt += scrubbed.text;
    }
    Document cleaned = doc;
    cleaned.text = std::move(rebuilt);
    out.doc_report.kept++;
    out.kept.docs.push_back(std::move(cleaned));
  }
  return out;
}

}  // namespace kidlm
