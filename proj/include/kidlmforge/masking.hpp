#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kidlmforge/strata.hpp"
#include "kidlmforge/types.hpp"

namespace kidlm {

struct WordSpan {
  std::size_t begin = 0;  // token index, inclusive
  std::size_t end = 0;    // token index, exclusive
  std::string word;       // detokenized concatenation of the span's tokens
};

struct TokenizedSequence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<WordSpan> word_spans;

  // throws Error("bad-sequence") when spans do not tile [0, tokens.size())
  // or a span's word mismatches its tokens
  void validate() const;
};

// One token per word; spans all have width 1.
TokenizedSequence tokenize_words(const std::string& id, std::string_view text);

enum class CorruptionMode { PureMask, Bert801010 };
enum class MaskUnit { Word, Token };

struct MaskingPolicy {
  double p_stopword = 0.15;
  double p_dalechall = 0.20;
  double p_other = 0.25;
  CorruptionMode corruption = CorruptionMode::PureMask;
  MaskUnit unit = MaskUnit::Word;
  std::uint64_t seed = 0;
  std::string mask_token = "[MASK]";

  static MaskingPolicy kidlm_plus(std::uint64_t seed = 0);  // 0.15/0.20/0.25
  static MaskingPolicy kidlm(std::uint64_t seed = 0);       // uniform 0.15
  // accepts "kidlm", "kidlm-plus", or "custom:p1,p2,p3"
  static MaskingPolicy parse(const std::string& spec, std::uint64_t seed = 0);

  void validate() const;  // probabilities in [0,1]
};

struct MaskedExample {
  std::string id;
  std::vector<std::string> tokens;            // after corruption
  std::vector<std::size_t> mask_positions;    // strictly increasing
  std::map<std::size_t, std::string> labels;  // position -> original token
  std::map<std::size_t, Stratum> strata;      // position -> word stratum
};

double assign_mask_probability(Stratum stratum, const MaskingPolicy& policy);

// One Bernoulli draw per word span; a drawn span is corrupted whole.
// Randomness comes only from (policy.seed, example_index, span_index), so
// results are reproducible under any parallel schedule.
// Throws Error("empty-sequence") when the sequence has no word spans.
MaskedExample mask_sequence(const TokenizedSequence& seq,
                            const StrataLexicon& lexicon,
                            const MaskingPolicy& policy,
                            std::uint64_t example_index);

// Sanity metric: sum over strata of fraction x masking probability.
double expected_mask_fraction(const StrataProportions& props,
                              const MaskingPolicy& policy);

struct ScoredDistribution;  // scoring.hpp

// Mean negative log-likelihood of the original tokens at the masked
// positions, natural log. Distributions must arrive in mask-position order.
double mlm_loss(const MaskedExample& example,
                const std::vector<ScoredDistribution>& distributions);

// JSON Lines schema (exact):
// {"id": str, "tokens": [str], "mask_positions": [int],
//  "labels": {"<pos>": str}, "strata": {"<pos>": "stopword"|...}}
std::string masked_example_to_json(const MaskedExample& example);
MaskedExample masked_example_from_json(const std::string& line);

// Pre-tokenized input records:
// {"id": str, "tokens": [str], "word_spans": [[start, end, "word"]]}
std::string tokenized_sequence_to_json(const TokenizedSequence& seq);
TokenizedSequence tokenized_sequence_from_json(const std::string& line);

}  // namespace kidlm
