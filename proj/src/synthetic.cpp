#include "kidlmforge/synthetic.hpp"

#include "kidlmforge/rng.hpp"

namespace kidlm {

const std::vector<std::string>& simple_tier_vocabulary() {
  static const std::vector<std::string> vocab = {
      "the",  "a",      "and",   "to",    "is",    "was",   "on",    "in",
      "it",   "he",     "she",   "they",  "we",    "dog",   "cat",   "ball",
      "sun",  "tree",   "house", "school", "play",  "run",   "jump",  "see",
      "look", "big",    "small", "red",   "blue",  "happy", "fun",   "day",
      "mom",  "dad",    "friend", "book",  "read",  "like",  "go",    "come",
      "eat",  "food",   "water", "bird",  "fish",  "park",  "game",  "home",
      "good", "little", "walk",  "talk",  "help",  "find",  "make",  "ride"};
  return vocab;
}

const std::vector<std::string>& complex_tier_vocabulary() {
  static const std::vector<std::string> vocab = {
      "photosynthesis", "arbitration",   "jurisprudence", "thermodynamics",
      "epistemology",   "infrastructure", "macroeconomic", "bureaucracy",
      "paleontologist", "constitutional", "proliferation", "biodiversity",
      "semiconductor",  "anthropology",  "equilibrium",   "hypothesis",
      "metamorphosis",  "precipitation", "archipelago",   "chromatography",
      "quintessential", "unprecedented", "simultaneously", "consequently",
      "parliamentary",  "catastrophic",  "institutional", "algorithmic",
      "phenomenon",     "sedimentary",   "territorial",   "legislation",
      "topographical",  "vulnerability", "condensation",  "regurgitate",
      "orchestration",  "misdemeanor",   "totalitarian",  "amalgamation",
      "extrapolate",    "circumference", "perpendicular", "kaleidoscope",
      "magnanimous",    "surreptitious", "juxtaposition", "obfuscation"};
  return vocab;
}

std::vector<std::vector<std::string>> generate_sentences(
    const std::vector<std::string>& vocabulary, std::size_t n_sentences,
    std::size_t words_per_sentence, std::uint64_t seed) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(n_sentences);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    std::vector<std::string> tokens;
    tokens.reserve(words_per_sentence);
    for (std::size_t w = 0; w < words_per_sentence; ++w) {
      tokens.push_back(vocabulary[rng::below(vocabulary.size(), seed, s, w, 0)]);
    }
    sentences.push_back(std::move(tokens));
  }
  return sentences;
}

std::vector<std::vector<std::string>> generate_mixed_sentences(
    const std::vector<std::string>& base, const std::vector<std::string>& rare,
    double rare_fraction, std::size_t n_sentences,
    std::size_t words_per_sentence, std::uint64_t seed) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(n_sentences);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    std::vector<std::string> tokens;
    tokens.reserve(words_per_sentence);
    for (std::size_t w = 0; w < words_per_sentence; ++w) {
      double u = rng::uniform(seed, s, w, 1);
      const auto& pool = u < rare_fraction ? rare : base;
      tokens.push_back(pool[rng::below(pool.size(), seed, s, w, 2)]);
    }
    sentences.push_back(std::move(tokens));
  }
  return sentences;
}

DocumentSet sentences_to_documents(
    const std::vector<std::vector<std::string>>& sentences,
    const std::string& source) {
  DocumentSet set;
  set.docs.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Document doc;
    doc.id = source + "-" + std::to_string(i);
    doc.source = source;
    for (const std::string& w : sentences[i]) {
      if (!doc.text.empty()) doc.text += ' ';
      doc.text += w;
    }
    doc.text += '.';
    set.docs.push_back(std::move(doc));
  }
  return set;
}

std::vector<std::vector<std::string>> generate_strata_sentences(
    const std::vector<std::string>& stopword_pool,
    const std::vector<std::string>& dalechall_pool,
    const StrataCorpusSpec& spec) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(spec.n_sentences);
  for (std::size_t s = 0; s < spec.n_sentences; ++s) {
    std::vector<std::string> tokens;
    tokens.reserve(spec.words_per_sentence);
    for (std::size_t w = 0; w < spec.words_per_sentence; ++w) {
      double u = rng::uniform(spec.seed, s, w, 10);
      if (u < spec.p_stopword) {
        tokens.push_back(
            stopword_pool[rng::below(stopword_pool.size(), spec.seed, s, w, 11)]);
      } else if (u < spec.p_stopword + spec.p_dalechall) {
        tokens.push_back(dalechall_pool[rng::below(dalechall_pool.size(),
                                                   spec.seed, s, w, 12)]);
      } else {
        // a digit guarantees the word classifies as "other"
        tokens.push_back(
            "x" + std::to_string(rng::below(99991, spec.seed, s, w, 13)) + "q");
      }
    }
    sentences.push_back(std::move(tokens));
  }
  return sentences;
}

}  // namespace kidlm
