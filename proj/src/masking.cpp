#include "kidlmforge/masking.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "kidlmforge/rng.hpp"
#include "kidlmforge/scoring.hpp"
#include "kidlmforge/text.hpp"

namespace kidlm {

void TokenizedSequence::validate() const {
  std::size_t expected_begin = 0;
  for (const WordSpan& span : word_spans) {
    if (span.begin != expected_begin || span.end <= span.begin ||
        span.end > tokens.size())
      throw Error("bad-sequence", "word spans must tile the token range");
    std::string joined;
    for (std::size_t i = span.begin; i < span.end; ++i) joined += tokens[i];
    if (joined != span.word)
      throw Error("bad-sequence",
                  "span word \"" + span.word + "\" != token concatenation");
    expected_begin = span.end;
  }
  if (expected_begin != tokens.size())
    throw Error("bad-sequence", "word spans must cover every token");
}

TokenizedSequence tokenize_words(const std::string& id, std::string_view text) {
  TokenizedSequence seq;
  seq.id = id;
  seq.tokens = word_segment(text);
  seq.word_spans.reserve(seq.tokens.size());
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    seq.word_spans.push_back({i, i + 1, seq.tokens[i]});
  }
  return seq;
}

MaskingPolicy MaskingPolicy::kidlm_plus(std::uint64_t seed) {
  MaskingPolicy p;
  p.seed = seed;
  return p;
}

MaskingPolicy MaskingPolicy::kidlm(std::uint64_t seed) {
  MaskingPolicy p;
  p.p_stopword = p.p_dalechall = p.p_other = 0.15;
  p.seed = seed;
  return p;
}

MaskingPolicy MaskingPolicy::parse(const std::string& spec, std::uint64_t seed) {
  if (spec == "kidlm") return kidlm(seed);
  if (spec == "kidlm-plus") return kidlm_plus(seed);
  if (spec.rfind("custom:", 0) == 0) {
    std::istringstream in(spec.substr(7));
    MaskingPolicy p;
    p.seed = seed;
    char c1 = 0, c2 = 0;
    if (!(in >> p.p_stopword >> c1 >> p.p_dalechall >> c2 >> p.p_other) ||
        c1 != ',' || c2 != ',')
      throw Error("config", "custom policy must be custom:p1,p2,p3");
    p.validate();
    return p;
  }
  throw Error("config", "unknown policy: " + spec);
}

void MaskingPolicy::validate() const {
  for (double p : {p_stopword, p_dalechall, p_other}) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error("config", "masking probabilities must be in [0,1]");
  }
  if (mask_token.empty()) throw Error("config", "mask token must be non-empty");
}

double assign_mask_probability(Stratum stratum, const MaskingPolicy& policy) {
  switch (stratum) {
    case Stratum::Stopword: return policy.p_stopword;
    case Stratum::DaleChall: return policy.p_dalechall;
    case Stratum::Other: return policy.p_other;
  }
  return policy.p_other;
}

namespace {

// Draw slots within one (seed, example, span) key.
constexpr std::uint64_t kSlotMask = 0;
constexpr std::uint64_t kSlotAction = 1;
constexpr std::uint64_t kSlotRandomBase = 2;

void corrupt_span(MaskedExample& out, const TokenizedSequence& seq,
                  const MaskingPolicy& policy, Stratum stratum,
                  std::size_t span_begin, std::size_t span_end,
                  std::uint64_t rng_index, std::uint64_t example_index) {
  enum class Action { Mask, Random, Keep };
  Action action = Action::Mask;
  if (policy.corruption == CorruptionMode::Bert801010) {
    double a = rng::uniform(policy.seed, example_index,
                            rng_index * 4 + kSlotAction, 1);
    if (a < 0.8) {
      action = Action::Mask;
    } else if (a < 0.9) {
      action = Action::Random;
    } else {
      action = Action::Keep;
    }
  }
  for (std::size_t pos = span_begin; pos < span_end; ++pos) {
    out.mask_positions.push_back(pos);
    out.labels[pos] = seq.tokens[pos];
    out.strata[pos] = stratum;
    switch (action) {
      case Action::Mask:
        out.tokens[pos] = policy.mask_token;
        break;
      case Action::Random: {
        // replacement drawn from the sequence's own original tokens
        std::uint64_t r = rng::below(
            seq.tokens.size(), policy.seed, example_index,
            rng_index * 4 + kSlotRandomBase, pos - span_begin);
        out.tokens[pos] = seq.tokens[r];
        break;
      }
      case Action::Keep:
        break;
    }
  }
}

}  // namespace

MaskedExample mask_sequence(const TokenizedSequence& seq,
                            const StrataLexicon& lexicon,
                            const MaskingPolicy& policy,
                            std::uint64_t example_index) {
  policy.validate();
  seq.validate();
  if (seq.word_spans.empty())
    throw Error("empty-sequence", "cannot mask a sequence with no words");

  MaskedExample out;
  out.id = seq.id;
  out.tokens = seq.tokens;

  if (policy.unit == MaskUnit::Word) {
    for (std::size_t si = 0; si < seq.word_spans.size(); ++si) {
      const WordSpan& span = seq.word_spans[si];
      Stratum stratum = classify_word(span.word, lexicon);
      double p = assign_mask_probability(stratum, policy);
      double u = rng::uniform(policy.seed, example_index, si * 4 + kSlotMask, 0);
      if (u < p)
        corrupt_span(out, seq, policy, stratum, span.begin, span.end, si,
                     example_index);
    }
  } else {
    // ablation mode: one draw per token, stratum from the enclosing word
    for (const WordSpan& span : seq.word_spans) {
      Stratum stratum = classify_word(span.word, lexicon);
      double p = assign_mask_probability(stratum, policy);
      for (std::size_t pos = span.begin; pos < span.end; ++pos) {
        double u =
            rng::uniform(policy.seed, example_index, pos * 4 + kSlotMask, 0);
        if (u < p)
          corrupt_span(out, seq, policy, stratum, pos, pos + 1, pos,
                       example_index);
      }
    }
  }
  // positions were appended in span order, which is already increasing
  return out;
}

double expected_mask_fraction(const StrataProportions& props,
                              const MaskingPolicy& policy) {
  return props.stopword * policy.p_stopword +
         props.dalechall * policy.p_dalechall + props.other * policy.p_other;
}

double mlm_loss(const MaskedExample& example,
                const std::vector<ScoredDistribution>& distributions) {
  const std::size_t n = example.mask_positions.size();
  if (distributions.size() != n)
    throw Error("position-mismatch",
                "expected " + std::to_string(n) + " distributions, got " +
                    std::to_string(distributions.size()));
  if (n == 0) return 0.0;

  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const ScoredDistribution& dist = distributions[i];
    std::size_t pos = example.mask_positions[i];
    if (dist.position != pos)
      throw Error("position-mismatch",
                  "distribution " + std::to_string(i) + " is for position " +
                      std::to_string(dist.position) + ", expected " +
                      std::to_string(pos));
    double mass = 0;
    for (const auto& [token, logprob] : dist.entries) mass += std::exp(logprob);
    if (mass > dist.total_mass + 1e-6 ||
        dist.total_mass > 1.0 + 1e-6)
      throw Error("bad-distribution", "distribution is not normalized");

    const std::string& label = example.labels.at(pos);
    const double* logp = nullptr;
    for (const auto& [token, lp] : dist.entries) {
      if (token == label) {
        logp = &lp;
        break;
      }
    }
    if (!logp)
      throw Error("label-out-of-vocab",
                  "label \"" + label + "\" missing from distribution");
    total += *logp;
  }
  return -total / static_cast<double>(n);
}

namespace {
using nlohmann::json;
}

std::string masked_example_to_json(const MaskedExample& example) {
  json obj;
  obj["id"] = example.id;
  obj["tokens"] = example.tokens;
  obj["mask_positions"] = example.mask_positions;
  json labels = json::object();
  for (const auto& [pos, token] : example.labels)
    labels[std::to_string(pos)] = token;
  obj["labels"] = std::move(labels);
  json strata = json::object();
  for (const auto& [pos, stratum] : example.strata)
    strata[std::to_string(pos)] = stratum_name(stratum);
  obj["strata"] = std::move(strata);
  return obj.dump();
}

MaskedExample masked_example_from_json(const std::string& line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object())
    throw Error("bad-example", "masked example line is not a JSON object");
  MaskedExample ex;
  try {
    ex.id = obj.at("id").get<std::string>();
    ex.tokens = obj.at("tokens").get<std::vector<std::string>>();
    ex.mask_positions = obj.at("mask_positions").get<std::vector<std::size_t>>();
    for (const auto& [key, value] : obj.at("labels").items())
      ex.labels[std::stoul(key)] = value.get<std::string>();
    for (const auto& [key, value] : obj.at("strata").items())
      ex.strata[std::stoul(key)] = stratum_from_name(value.get<std::string>());
  } catch (const json::exception& e) {
    throw Error("bad-example", std::string("malformed masked example: ") + e.what());
  }
  for (std::size_t i = 0; i + 1 < ex.mask_positions.size(); ++i) {
    if (ex.mask_positions[i] >= ex.mask_positions[i + 1])
      throw Error("bad-example", "mask positions must be strictly increasing");
  }
  for (std::size_t pos : ex.mask_positions) {
    if (pos >= ex.tokens.size() || !ex.labels.count(pos) || !ex.strata.count(pos))
      throw Error("bad-example", "every mask position needs a label and stratum");
  }
  return ex;
}

std::string tokenized_sequence_to_json(const TokenizedSequence& seq) {
  json obj;
  obj["id"] = seq.id;
  obj["tokens"] = seq.tokens;
  json spans = json::array();
  for (const WordSpan& span : seq.word_spans)
    spans.push_back(json::array({span.begin, span.end, span.word}));
  obj["word_spans"] = std::move(spans);
  return obj.dump();
}

TokenizedSequence tokenized_sequence_from_json(const std::string& line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object())
    throw Error("bad-sequence", "sequence line is not a JSON object");
  TokenizedSequence seq;
  try {
    seq.id = obj.at("id").get<std::string>();
    seq.tokens = obj.at("tokens").get<std::vector<std::string>>();
    for (const auto& entry : obj.at("word_spans")) {
      WordSpan span;
      span.begin = entry.at(0).get<std::size_t>();
      span.end = entry.at(1).get<std::size_t>();
      span.word = entry.at(2).get<std::string>();
      seq.word_spans.push_back(std::move(span));
    }
  } catch (const json::exception& e) {
    throw Error("bad-sequence", std::string("malformed sequence: ") + e.what());
  }
  seq.validate();
  return seq;
}

}  // namespace kidlm
