// kidlm-forge: corpus curation, stratified masking, and probing pipeline.
//
// Subcommands: ingest, filter, stats, strata, mask, eval-ppl,
// probe-stereotype, probe-cloze, probe-simplify. See README.md for the
// config grammar and artifact formats.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kidlmforge/corpus.hpp"
#include "kidlmforge/filters.hpp"
#include "kidlmforge/jsonl.hpp"
#include "kidlmforge/lang_detect.hpp"
#include "kidlmforge/masking.hpp"
#include "kidlmforge/probes.hpp"
#include "kidlmforge/remote.hpp"
#include "kidlmforge/scoring.hpp"
#include "kidlmforge/strata.hpp"
#include "kidlmforge/synthetic.hpp"
#include "kidlmforge/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace kidlm;

namespace {

// ---------------------------------------------------------------- logging

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("KIDLM_FORGE_LOG");
    if (!env) return 1;  // warn
    std::string v = env;
    if (v == "error") return 0;
    if (v == "warn") return 1;
    if (v == "info") return 2;
    if (v == "debug") return 3;
    return 1;
  }();
  return level;
}

void log_at(int level, const char* tag, const std::string& msg) {
  if (log_level() >= level) std::cerr << "[" << tag << "] " << msg << "\n";
}
void log_info(const std::string& msg) { log_at(2, "info", msg); }
void log_debug(const std::string& msg) { log_at(3, "debug", msg); }

// ----------------------------------------------------------------- config

struct RunConfig {
  std::map<std::string, std::string> values;

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config", "cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::size_t first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw Error("config", path + ":" + std::to_string(line_no) +
                                  ": expected key = value");
      auto trim = [](std::string s) {
        std::size_t b = s.find_first_not_of(" \t");
        std::size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw Error("config", path + ":" + std::to_string(line_no) + ": empty key");
      cfg.values[key] = value;
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    values[key] = value;
  }

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      return std::stoull(it->second);
    } catch (...) {
      throw Error("config", key + " must be an integer, got: " + it->second);
    }
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (...) {
      throw Error("config", key + " must be a number, got: " + it->second);
    }
  }

  // canonical dump: sorted key = value lines. Execution details that cannot
  // change results (output dir, pool size) stay out, so re-runs into a
  // different directory still produce byte-identical artifacts.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values) {
      if (k == "out" || k == "jobs") continue;
      out += k + " = " + v + "\n";
    }
    return out;
  }

  std::string digest_hex() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
  }
};

std::string data_default(const std::string& rel) {
  return std::string(KIDLM_DATA_DIR) + "/" + rel;
}

struct Session {
  RunConfig cfg;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  fs::path out_dir;

  json header() const {
    return json{{"tool", "kidlm-forge"},
                {"config_digest", cfg.digest_hex()},
                {"seed", seed}};
  }

  std::string text_header() const {
    return "# kidlm-forge config_digest=" + cfg.digest_hex() +
           " seed=" + std::to_string(seed) + "\n";
  }

  void write_jsonl(const std::string& name,
                   const std::vector<std::string>& lines) const {
    std::string contents = jsonl::make_header_line(header()) + "\n";
    for (const auto& line : lines) contents += line + "\n";
    jsonl::atomic_write(out_dir / name, contents);
    log_info("wrote " + (out_dir / name).string());
  }

  void write_json(const std::string& name, json body) const {
    body["_meta"] = header();
    jsonl::atomic_write(out_dir / name, body.dump(2) + "\n");
    log_info("wrote " + (out_dir / name).string());
  }

  void write_text(const std::string& name, const std::string& body) const {
    jsonl::atomic_write(out_dir / name, text_header() + body);
    log_info("wrote " + (out_dir / name).string());
  }
};

void require_file(const std::string& path, const std::string& what) {
  if (!fs::exists(path))
    throw Error("config", what + " does not exist: " + path);
}

// bounded worker pool; outputs are stored by item index, so results are
// independent of scheduling
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  if (count == 0) return;
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          fn(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

// ------------------------------------------------------------- doc loading

DocumentSet read_documents(const Session& session,
                           const std::string& key = "input") {
  std::string path = session.cfg.get(key);
  if (path.empty()) throw Error("config", "config key '" + key + "' is required");
  require_file(path, key);
  std::ifstream in(path);
  IngestResult r = ingest_documents(in, session.cfg.get("source"));
  log_info("loaded " + std::to_string(r.set.size()) + " documents (" +
           std::to_string(r.rejects.size()) + " rejected)");
  return std::move(r.set);
}

std::string document_to_json(const Document& doc) {
  json obj;
  obj["id"] = doc.id;
  obj["source"] = doc.source;
  obj["text"] = doc.text;
  if (doc.url) obj["url"] = *doc.url;
  if (!doc.tags.empty()) obj["tags"] = doc.tags;
  if (doc.grade_level) obj["grade_level"] = *doc.grade_level;
  if (doc.region) obj["region"] = *doc.region;
  return obj.dump();
}

StrataLexicon load_session_lexicons(const Session& session) {
  std::string stop =
      session.cfg.get("stopwords", data_default("lexicons/stopwords_en.txt"));
  std::string dale = session.cfg.get(
      "dalechall", data_default("lexicons/dale_chall_familiar_words.txt"));
  require_file(stop, "stopwords");
  require_file(dale, "dalechall");
  return load_lexicons(stop, dale);
}

MaskingPolicy session_policy(const Session& session) {
  MaskingPolicy policy =
      MaskingPolicy::parse(session.cfg.get("policy", "kidlm-plus"), session.seed);
  std::string corruption = session.cfg.get("corruption", "pure");
  if (corruption == "pure") {
    policy.corruption = CorruptionMode::PureMask;
  } else if (corruption == "bert") {
    policy.corruption = CorruptionMode::Bert801010;
  } else {
    throw Error("config", "corruption must be pure or bert, got: " + corruption);
  }
  std::string unit = session.cfg.get("mask_unit", "word");
  if (unit == "word") {
    policy.unit = MaskUnit::Word;
  } else if (unit == "token") {
    policy.unit = MaskUnit::Token;
  } else {
    throw Error("config", "mask_unit must be word or token, got: " + unit);
  }
  return policy;
}

// scorer selection: "reference" fits on scorer_corpus (or input); a URL
// goes through the wire protocol
struct ScorerHandle {
  ReferenceScorerPtr reference;
  std::shared_ptr<RemoteScorer> remote;
  const MaskedScorer* masked = nullptr;
  const PrefixScorer* prefix = nullptr;
  std::string name;
};

ScorerHandle make_scorer(const Session& session) {
  ScorerHandle handle;
  std::string spec = session.cfg.get("scorer", "reference");
  if (spec == "reference") {
    std::string corpus_key =
        session.cfg.values.count("scorer_corpus") ? "scorer_corpus" : "input";
    DocumentSet corpus = read_documents(session, corpus_key);
    ReferenceScorerOptions options;
    options.smoothing = session.cfg.get_double("smoothing", 1.0);
    options.bigram_weight = session.cfg.get_double("bigram_weight", 0.7);
    handle.reference = fit_reference_scorer(corpus, options);
    handle.masked = handle.reference.get();
    handle.prefix = handle.reference.get();
    handle.name = "reference";
  } else {
    RemoteLimits limits;
    limits.max_in_flight = session.jobs;
    limits.timeout_ms = static_cast<int>(session.cfg.get_u64("timeout_ms", 30000));
    if (const char* token = std::getenv("KIDLM_FORGE_TOKEN"))
      limits.bearer_token = std::string(token);
    handle.remote = std::make_shared<RemoteScorer>(
        spec, limits, "[MASK]", session.cfg.get_u64("top_m", 50));
    handle.masked = handle.remote.get();
    handle.prefix = handle.remote.get();
    handle.name = spec;
  }
  return handle;
}

json report_to_json(const FilterReport& report) {
  return json{{"kept", report.kept},
              {"dropped", report.dropped},
              {"drop_reasons", report.drop_reasons},
              {"redactions", report.redactions}};
}

// ------------------------------------------------------------ subcommands

int cmd_ingest(const Session& session) {
  std::string path = session.cfg.get("input");
  if (path.empty()) throw Error("config", "config key 'input' is required");
  require_file(path, "input");
  std::ifstream in(path);
  IngestResult result = ingest_documents(in, session.cfg.get("source"));

  std::vector<std::string> lines;
  lines.reserve(result.set.size());
  for (const Document& doc : result.set.docs)
    lines.push_back(document_to_json(doc));
  session.write_jsonl("documents.jsonl", lines);

  json rejects = json::array();
  for (const auto& r : result.rejects)
    rejects.push_back({{"line", r.line}, {"id", r.id}, {"reason", r.reason}});
  session.write_json("ingest_report.json",
                     json{{"ingested", result.set.size()},
                          {"rejected", result.rejects.size()},
                          {"rejects", rejects}});
  return 0;
}

int cmd_filter(const Session& session) {
  DocumentSet docs = read_documents(session);
  std::vector<QualityRule> rules;
  if (std::string rule_path = session.cfg.get("rules"); !rule_path.empty()) {
    require_file(rule_path, "rules");
    rules = load_quality_rules(rule_path);
  }
  double threshold = session.cfg.get_double("threshold", 0.9);
  TrigramLanguageDetector detector;
  DocumentFilterOutcome outcome = filter_documents(docs, rules, detector, threshold);

  std::vector<std::string> lines;
  lines.reserve(outcome.kept.size());
  for (const Document& doc : outcome.kept.docs)
    lines.push_back(document_to_json(doc));
  session.write_jsonl("filtered.jsonl", lines);
  session.write_json("filter_report.json",
                     json{{"documents", report_to_json(outcome.doc_report)},
                          {"sentences", report_to_json(outcome.sentence_report)},
                          {"threshold", threshold}});
  return 0;
}

int cmd_stats(const Session& session) {
  DocumentSet docs = read_documents(session);
  CorpusStats stats = corpus_stats(docs);
  session.write_text("stats.csv", stats_to_csv(stats));
  session.write_text("stats.md", stats_to_markdown(stats));
  return 0;
}

int cmd_strata(const Session& session) {
  StrataLexicon lexicon = load_session_lexicons(session);
  json body{{"stopwords", lexicon.stopwords.size()},
            {"dalechall", lexicon.dalechall.size()},
            {"overlap_removed", lexicon.provenance.overlap_removed},
            {"stopword_digest", lexicon.provenance.stopword_digest},
            {"dalechall_digest", lexicon.provenance.dalechall_digest}};
  if (!session.cfg.get("input").empty()) {
    DocumentSet docs = read_documents(session);
    StrataProportions props = strata_proportions(docs, lexicon);
    body["proportions"] = {{"stopword", props.stopword},
                           {"dalechall", props.dalechall},
                           {"other", props.other}};
    body["expected_mask_fraction"] =
        expected_mask_fraction(props, session_policy(session));
  }
  session.write_json("strata.json", body);
  return 0;
}

int cmd_mask(const Session& session) {
  StrataLexicon lexicon = load_session_lexicons(session);
  MaskingPolicy policy = session_policy(session);

  // sentence-per-example collation over documents, or pre-tokenized input
  std::vector<TokenizedSequence> sequences;
  if (session.cfg.get("input_format", "documents") == "pretokenized") {
    std::string path = session.cfg.get("input");
    if (path.empty()) throw Error("config", "config key 'input' is required");
    require_file(path, "input");
    std::ifstream in(path);
    jsonl::for_each_record(in, [&](const json& obj, std::size_t) {
      sequences.push_back(tokenized_sequence_from_json(obj.dump()));
    });
  } else {
    DocumentSet docs = read_documents(session);
    for (const Document& doc : docs.docs) {
      for (const Sentence& sentence : segment_sentences(doc)) {
        TokenizedSequence seq = tokenize_words(
            doc.id + "#" + std::to_string(sentence.index), sentence.text);
        if (!seq.tokens.empty()) sequences.push_back(std::move(seq));
      }
    }
  }

  std::vector<std::string> lines(sequences.size());
  std::atomic<std::size_t> masked_words{0}, total_words{0};
  parallel_for(sequences.size(), session.jobs, [&](std::size_t i) {
    MaskedExample ex = mask_sequence(sequences[i], lexicon, policy, i);
    total_words += sequences[i].word_spans.size();
    masked_words += ex.mask_positions.size();
    lines[i] = masked_example_to_json(ex);
  });
  session.write_jsonl("masked.jsonl", lines);

  json report{{"examples", sequences.size()},
              {"total_words", total_words.load()},
              {"masked_positions", masked_words.load()},
              {"policy",
               {{"p_stopword", policy.p_stopword},
                {"p_dalechall", policy.p_dalechall},
                {"p_other", policy.p_other}}}};
  if (total_words > 0) {
    report["overall_mask_fraction"] =
        static_cast<double>(masked_words.load()) /
        static_cast<double>(total_words.load());
  }
  session.write_json("mask_report.json", report);
  return 0;
}

int cmd_eval_ppl(const Session& session) {
  ScorerHandle scorer = make_scorer(session);

  std::map<int, std::vector<std::vector<std::string>>> grade_map;
  std::string input = session.cfg.get("grade_input", session.cfg.get("input"));
  if (input == "synthetic") {
    // controlled-vocabulary tiers standing in for restricted graded corpora
    std::uint64_t seed = session.seed;
    grade_map[2] = generate_sentences(simple_tier_vocabulary(), 40, 9, seed + 1);
    grade_map[4] = generate_mixed_sentences(
        simple_tier_vocabulary(), complex_tier_vocabulary(), 0.5, 40, 11, seed + 2);
  } else {
    if (input.empty()) throw Error("config", "config key 'input' is required");
    require_file(input, "input");
    std::ifstream in(input);
    jsonl::for_each_record(in, [&](const json& obj, std::size_t line) {
      if (!obj.contains("grade") || !obj.contains("text"))
        throw Error("config", "graded record needs grade and text (line " +
                                  std::to_string(line) + ")");
      int grade = obj["grade"].get<int>();
      Document doc;
      doc.id = obj.value("doc_id", "line-" + std::to_string(line));
      doc.source = "graded";
      doc.text = obj["text"].get<std::string>();
      for (const Sentence& sentence : segment_sentences(doc)) {
        auto tokens = word_segment(sentence.text);
        if (!tokens.empty()) grade_map[grade].push_back(std::move(tokens));
      }
    });
  }

  // flatten for the worker pool, then reduce per grade
  std::vector<std::pair<int, std::vector<std::string>>> flat;
  for (const auto& [grade, sentences] : grade_map) {
    if (sentences.empty())
      throw Error("empty-grade-bucket",
                  "grade " + std::to_string(grade) + " has no sentences");
    for (const auto& s : sentences) flat.emplace_back(grade, s);
  }
  std::vector<double> ppls(flat.size());
  parallel_for(flat.size(), session.jobs, [&](std::size_t i) {
    ppls[i] = pseudo_perplexity(flat[i].second, *scorer.masked).ppl;
  });
  GradeLevelReport report;
  std::map<int, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    sums[flat[i].first].first += ppls[i];
    sums[flat[i].first].second += 1;
  }
  for (const auto& [grade, sum] : sums)
    report.per_grade[grade] = {sum.second, sum.first / sum.second};

  session.write_text("ppl.csv", grade_report_to_csv(scorer.name, report));
  session.write_text("ppl.md", grade_report_to_markdown(scorer.name, report));
  return 0;
}

CompletionFilterOptions session_filter_options(
    const Session& session, std::unordered_set<std::string>& adjectives,
    std::unordered_set<std::string>& stoplist) {
  std::string adj_path =
      session.cfg.get("adjectives", data_default("lexicons/adjectives_en.txt"));
  std::string stop_path = session.cfg.get(
      "stoplist", data_default("lexicons/non_adjective_stoplist.txt"));
  require_file(adj_path, "adjectives");
  require_file(stop_path, "stoplist");
  adjectives = load_word_set(adj_path);
  stoplist = load_word_set(stop_path);
  CompletionFilterOptions options;
  options.adjectives = &adjectives;
  options.stoplist = &stoplist;
  options.require_adjective =
      session.cfg.get("require_adjective", "true") != "false";
  return options;
}

int cmd_probe_stereotype(const Session& session) {
  ScorerHandle scorer = make_scorer(session);
  SocialGroupRegistry registry = SocialGroupRegistry::load(
      session.cfg.get("groups", data_default("social_groups.json")));
  ProbeQuery::Form form = session.cfg.get("prompt_form", "masked") == "prefix"
                              ? ProbeQuery::Form::Prefix
                              : ProbeQuery::Form::Masked;
  auto queries = build_stereotype_prompts(registry, form);

  std::unordered_set<std::string> adjectives, stoplist;
  CompletionFilterOptions options =
      session_filter_options(session, adjectives, stoplist);
  std::size_t n = session.cfg.get_u64("n_completions", 5);

  LexiconSentimentClassifier sentiment(
      load_word_set(session.cfg.get(
          "sentiment_positive", data_default("lexicons/sentiment_positive.txt"))),
      load_word_set(session.cfg.get(
          "sentiment_negative", data_default("lexicons/sentiment_negative.txt"))));
  LexiconToxicityClassifier toxicity(load_word_set(session.cfg.get(
      "toxicity_terms", data_default("lexicons/toxicity_terms.txt"))));

  // scorer failures stay scoped to their query; the rest of the suite runs
  std::vector<std::vector<ScoredCompletionRow>> per_query(queries.size());
  std::vector<std::string> query_errors(queries.size());
  parallel_for(queries.size(), session.jobs, [&](std::size_t i) {
    try {
      CollectResult collected = collect_completions(queries[i], scorer.masked,
                                                    scorer.prefix, n, options);
      per_query[i] =
          score_completions(queries[i], collected.completions, sentiment, toxicity);
    } catch (const Error& e) {
      query_errors[i] = e.code();
    }
  });

  std::vector<ScoredCompletionRow> rows;
  std::vector<std::string> detail_lines;
  std::size_t failed_queries = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!query_errors[i].empty()) {
      ++failed_queries;
      detail_lines.push_back(json{{"template_id", queries[i].template_id},
                                  {"category", queries[i].group_category},
                                  {"group", queries[i].group.value_or("")},
                                  {"error", query_errors[i]}}
                                 .dump());
      continue;
    }
    const auto& qrows = per_query[i];
    for (const auto& row : qrows) {
      rows.push_back(row);
      detail_lines.push_back(json{{"template_id", row.template_id},
                                  {"category", row.group_category},
                                  {"group", row.group},
                                  {"completion", row.completion},
                                  {"probability", row.probability},
                                  {"scored", row.scored},
                                  {"sentiment", row.sentiment},
                                  {"toxicity", row.toxicity}}
                                 .dump());
    }
  }
  if (failed_queries == queries.size())
    throw Error("scorer", "every probe query failed: " + query_errors[0]);
  if (failed_queries > 0)
    log_at(1, "warn", std::to_string(failed_queries) + " queries failed");
  OverallRowMode mode = session.cfg.get("all_row", "means") == "completions"
                            ? OverallRowMode::MeanOverCompletions
                            : OverallRowMode::MeanOfCategoryMeans;
  StereotypeReport report = aggregate_stereotype(rows, mode);
  session.write_jsonl("stereotype_rows.jsonl", detail_lines);
  session.write_text("stereotype.csv",
                     stereotype_report_to_csv(scorer.name, report));
  session.write_text("stereotype.md",
                     stereotype_report_to_markdown(scorer.name, report));
  return 0;
}

int cmd_probe_cloze(const Session& session) {
  ScorerHandle scorer = make_scorer(session);
  auto templates = load_probe_templates(
      session.cfg.get("templates", data_default("probe_templates.jsonl")));
  std::size_t k = session.cfg.get_u64("top_k", 5);

  std::vector<std::string> lines(templates.size());
  parallel_for(templates.size(), session.jobs, [&](std::size_t i) {
    ProbeQuery query = ProbeQuery::from_template(
        templates[i].id, templates[i].category, templates[i].text, std::nullopt);
    TopKResult top = cloze_topk(query, *scorer.masked, k);
    json items = json::array();
    for (const auto& [token, prob] : top.items)
      items.push_back({{"token", token}, {"probability", prob}});
    json line{{"id", templates[i].id},
              {"category", templates[i].category},
              {"query", query.text},
              {"topk", items}};
    if (top.note) line["note"] = *top.note;
    lines[i] = line.dump();
  });
  session.write_jsonl("cloze.jsonl", lines);
  return 0;
}

int cmd_probe_simplify(const Session& session) {
  ScorerHandle scorer = make_scorer(session);
  std::string input = session.cfg.get("input");
  if (input.empty()) throw Error("config", "config key 'input' is required");
  require_file(input, "input");

  struct Case {
    std::string id;
    std::vector<std::string> tokens;
    std::size_t begin = 0, end = 0;
  };
  std::vector<Case> cases;
  std::vector<std::string> skipped;
  {
    std::ifstream in(input);
    jsonl::for_each_record(in, [&](const json& obj, std::size_t line) {
      if (!obj.contains("text") || !obj.contains("complex_word"))
        throw Error("config",
                    "simplify record needs text and complex_word (line " +
                        std::to_string(line) + ")");
      Case c;
      c.id = obj.value("id", "line-" + std::to_string(line));
      c.tokens = word_segment(obj["text"].get<std::string>());
      std::string target = fold_lower(obj["complex_word"].get<std::string>());
      bool found = false;
      for (std::size_t t = 0; t < c.tokens.size(); ++t) {
        if (fold_lower(c.tokens[t]) == target) {
          c.begin = t;
          c.end = t + 1;
          found = true;
          break;
        }
      }
      if (!found) {
        skipped.push_back(c.id);
        return;
      }
      cases.push_back(std::move(c));
    });
  }

  std::size_t k = session.cfg.get_u64("top_k", 3);
  std::vector<std::string> lines(cases.size());
  parallel_for(cases.size(), session.jobs, [&](std::size_t i) {
    TopKResult top = lexical_simplification_probe(
        cases[i].tokens, cases[i].begin, cases[i].end, *scorer.masked, k);
    json items = json::array();
    for (const auto& [token, prob] : top.items)
      items.push_back({{"token", token}, {"probability", prob}});
    json line{{"id", cases[i].id},
              {"complex_word", cases[i].tokens[cases[i].begin]},
              {"substitutes", items}};
    if (top.note) line["note"] = *top.note;
    lines[i] = line.dump();
  });
  session.write_jsonl("simplify.jsonl", lines);
  if (!skipped.empty())
    session.write_json("simplify_skipped.json", json{{"skipped", skipped}});
  return 0;
}

void print_error(const std::string& code, const std::string& message) {
  json err{{"error", {{"code", code}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kidlm-forge: child-directed corpus curation, stratified "
               "masking, and LM probing"};
  app.require_subcommand(1);

  std::string config_path, policy, corruption, scorer, out_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 0, top_m = 0;
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--seed", seed, "RNG seed recorded in every artifact");
  app.add_option("--jobs", jobs, "worker pool size (default: logical CPUs)");
  app.add_option("--policy", policy, "kidlm|kidlm-plus|custom:p1,p2,p3");
  app.add_option("--corruption", corruption, "pure|bert");
  app.add_option("--scorer", scorer, "reference|URL");
  app.add_option("--top-m", top_m, "distribution truncation for remote scorers");
  app.add_option("--out", out_dir, "artifact output directory");

  const char* names[] = {"ingest",           "filter",      "stats",
                         "strata",           "mask",        "eval-ppl",
                         "probe-stereotype", "probe-cloze", "probe-simplify"};
  const char* descs[] = {
      "parse document records into the canonical corpus form",
      "apply quality rules, language filtering, and PII scrubbing",
      "per-source and aggregate corpus statistics",
      "lexicon summary and corpus strata proportions",
      "export stratified masked training examples",
      "sentence-level pseudo-perplexity by grade bucket",
      "run the social-group prompt suite with sentiment/toxicity scoring",
      "top-K completions for the bundled probe templates",
      "mask a complex word and rank simpler substitutes"};
  for (std::size_t i = 0; i < 9; ++i) {
    // global flags may follow the subcommand on the command line
    app.add_subcommand(names[i], descs[i])->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage problems exit 2 (help and friends still exit 0)
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Session session;
  try {
    if (!config_path.empty()) session.cfg = RunConfig::load(config_path);
    // flags override config-file values
    if (app.count("--seed")) session.cfg.set("seed", std::to_string(seed));
    if (app.count("--jobs")) session.cfg.set("jobs", std::to_string(jobs));
    if (app.count("--policy")) session.cfg.set("policy", policy);
    if (app.count("--corruption")) session.cfg.set("corruption", corruption);
    if (app.count("--scorer")) session.cfg.set("scorer", scorer);
    if (app.count("--top-m")) session.cfg.set("top_m", std::to_string(top_m));
    if (app.count("--out")) session.cfg.set("out", out_dir);

    session.seed = session.cfg.get_u64("seed", 0);
    session.jobs =
        session.cfg.get_u64("jobs", std::thread::hardware_concurrency());
    if (session.jobs == 0) session.jobs = 1;
    std::string out = session.cfg.get("out");
    if (out.empty())
      throw Error("config", "--out DIR (or config 'out') is required");
    session.out_dir = out;
    fs::create_directories(session.out_dir);

    // validate policy/corruption early so bad configs exit 2
    session_policy(session);
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("config", e.what());
    return 2;
  }

  try {
    std::string sub = app.get_subcommands().front()->get_name();
    log_debug("subcommand " + sub + " seed " + std::to_string(session.seed));
    if (sub == "ingest") return cmd_ingest(session);
    if (sub == "filter") return cmd_filter(session);
    if (sub == "stats") return cmd_stats(session);
    if (sub == "strata") return cmd_strata(session);
    if (sub == "mask") return cmd_mask(session);
    if (sub == "eval-ppl") return cmd_eval_ppl(session);
    if (sub == "probe-stereotype") return cmd_probe_stereotype(session);
    if (sub == "probe-cloze") return cmd_probe_cloze(session);
    if (sub == "probe-simplify") return cmd_probe_simplify(session);
    print_error("usage", "unknown subcommand: " + sub);
    return 2;
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return e.code() == "config" ? 2 : 1;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
}
