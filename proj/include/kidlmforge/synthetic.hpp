#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kidlmforge/types.hpp"

namespace kidlm {

// Controlled vocabulary tiers for grade-style evaluation fixtures. The
// simple tier mimics early-reader text; the complex tier mixes in rare
// vocabulary the simple tier never sees.
const std::vector<std::string>& simple_tier_vocabulary();
const std::vector<std::string>& complex_tier_vocabulary();

// Seeded sentence generator over a fixed vocabulary (counter RNG, so the
// same arguments always give the same sentences).
std::vector<std::vector<std::string>> generate_sentences(
    const std::vector<std::string>& vocabulary, std::size_t n_sentences,
    std::size_t words_per_sentence, std::uint64_t seed);

// Like generate_sentences, but each word comes from `rare` with
// probability `rare_fraction` and from `base` otherwise.
std::vector<std::vector<std::string>> generate_mixed_sentences(
    const std::vector<std::string>& base, const std::vector<std::string>& rare,
    double rare_fraction, std::size_t n_sentences,
    std::size_t words_per_sentence, std::uint64_t seed);

// Wraps token lists into single-sentence documents ("w1 w2 w3.") so they
// can feed the corpus-facing APIs.
DocumentSet sentences_to_documents(
    const std::vector<std::vector<std::string>>& sentences,
    const std::string& source);

// Corpus with known strata: every word slot picks a stratum with the given
// probabilities, then draws a word surely belonging to it (stopwords and
// familiar words from the supplied sorted pools; "other" words carry a
// digit so they can never collide with either lexicon).
struct StrataCorpusSpec {
  double p_stopword = 0.4593;
  double p_dalechall = 0.2182;  // remainder goes to other
  std::size_t n_sentences = 15000;
  std::size_t words_per_sentence = 20;
  std::uint64_t seed = 0;
};

std::vector<std::vector<std::string>> generate_strata_sentences(
    const std::vector<std::string>& stopword_pool,
    const std::vector<std::string>& dalechall_pool,
    const StrataCorpusSpec& spec);

}  // namespace kidlm
