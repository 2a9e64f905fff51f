#include <doctest.h>

#include <cmath>
#include <future>
#include <map>

#include "kidlmforge/masking.hpp"
#include "kidlmforge/rng.hpp"
#include "kidlmforge/scoring.hpp"
#include "kidlmforge/synthetic.hpp"
#include "test_util.hpp"

using namespace kidlm;
using test::bundled_lexicon;

namespace {

TokenizedSequence seq_of(const std::string& id,
                         const std::vector<std::string>& words) {
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text += ' ';
    text += w;
  }
  return tokenize_words(id, text);
}

std::vector<std::string> sorted_pool(const std::unordered_set<std::string>& s) {
  std::vector<std::string> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  return v;
}

// independent per-position loss oracle: -log p summed by hand
double brute_force_loss(const MaskedExample& ex,
                        const std::vector<ScoredDistribution>& dists) {
  double sum = 0;
  for (std::size_t i = 0; i < ex.mask_positions.size(); ++i) {
    const std::string& label = ex.labels.at(ex.mask_positions[i]);
    double p = 0;
    for (const auto& [tok, lp] : dists[i].entries) {
      if (tok == label) p = std::exp(lp);
    }
    sum += -std::log(p);
  }
  return sum / static_cast<double>(ex.mask_positions.size());
}

ScoredDistribution uniform_dist(std::size_t position, std::size_t vocab) {
  ScoredDistribution d;
  d.position = position;
  double lp = -std::log(static_cast<double>(vocab));
  for (std::size_t i = 0; i < vocab; ++i)
    d.entries.emplace_back("w" + std::to_string(i), lp);
  d.sort_entries();
  return d;
}

}  // namespace

TEST_CASE("per-stratum masking probabilities are exact") {
  MaskingPolicy plus = MaskingPolicy::kidlm_plus();
  CHECK(assign_mask_probability(Stratum::Stopword, plus) == 0.15);
  CHECK(assign_mask_probability(Stratum::DaleChall, plus) == 0.20);
  CHECK(assign_mask_probability(Stratum::Other, plus) == 0.25);

  MaskingPolicy base = MaskingPolicy::kidlm();
  CHECK(assign_mask_probability(Stratum::Stopword, base) == 0.15);
  CHECK(assign_mask_probability(Stratum::DaleChall, base) == 0.15);
  CHECK(assign_mask_probability(Stratum::Other, base) == 0.15);
}

TEST_CASE("policy parsing") {
  CHECK(MaskingPolicy::parse("kidlm").p_other == 0.15);
  CHECK(MaskingPolicy::parse("kidlm-plus").p_other == 0.25);
  MaskingPolicy custom = MaskingPolicy::parse("custom:0.1,0.2,0.3");
  CHECK(custom.p_stopword == 0.1);
  CHECK(custom.p_dalechall == 0.2);
  CHECK(custom.p_other == 0.3);
  CHECK_THROWS_AS(MaskingPolicy::parse("custom:0.1,2.0,0.3"), Error);
  CHECK_THROWS_AS(MaskingPolicy::parse("nope"), Error);
}

TEST_CASE("certainty policy masks everything") {
  MaskingPolicy policy = MaskingPolicy::parse("custom:1.0,1.0,1.0", 7);
  TokenizedSequence seq = seq_of("s", {"she", "saw", "a", "butterfly"});
  MaskedExample ex = mask_sequence(seq, bundled_lexicon(), policy, 0);
  CHECK(ex.mask_positions.size() == 4);
  for (std::size_t pos : ex.mask_positions) {
    CHECK(ex.tokens[pos] == policy.mask_token);
    CHECK(ex.labels.at(pos) == seq.tokens[pos]);
  }
  CHECK(ex.strata.at(0) == Stratum::Stopword);   // she
  CHECK(ex.strata.at(3) == Stratum::DaleChall);  // butterfly
}

TEST_CASE("impossibility policy masks nothing") {
  MaskingPolicy policy = MaskingPolicy::parse("custom:0.0,0.0,0.0", 7);
  TokenizedSequence seq = seq_of("s", {"she", "saw", "a", "butterfly"});
  MaskedExample ex = mask_sequence(seq, bundled_lexicon(), policy, 0);
  CHECK(ex.mask_positions.empty());
  CHECK(ex.tokens == seq.tokens);
}

TEST_CASE("empty sequence is an error") {
  TokenizedSequence seq;
  seq.id = "empty";
  CHECK_THROWS_WITH_AS(
      mask_sequence(seq, bundled_lexicon(), MaskingPolicy::kidlm_plus(), 0),
      "cannot mask a sequence with no words", Error);
}

TEST_CASE("unmasked tokens stay identical; positions strictly increase") {
  MaskingPolicy policy = MaskingPolicy::kidlm_plus(123);
  TokenizedSequence seq =
      seq_of("s", {"the", "little", "dog", "ran", "across", "the", "park"});
  MaskedExample ex = mask_sequence(seq, bundled_lexicon(), policy, 5);
  std::map<std::size_t, bool> masked;
  for (std::size_t pos : ex.mask_positions) masked[pos] = true;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (!masked.count(i)) CHECK(ex.tokens[i] == seq.tokens[i]);
  }
  for (std::size_t i = 0; i + 1 < ex.mask_positions.size(); ++i)
    CHECK(ex.mask_positions[i] < ex.mask_positions[i + 1]);
}

TEST_CASE("empirical mask rates approach the policy, 100k words per stratum") {
  const StrataLexicon& lex = bundled_lexicon();
  StrataCorpusSpec spec;
  spec.p_stopword = 1.0 / 3.0;
  spec.p_dalechall = 1.0 / 3.0;
  spec.n_sentences = 15000;
  spec.words_per_sentence = 20;  // 100k words per stratum in expectation
  spec.seed = 42;
  auto sentences = generate_strata_sentences(sorted_pool(lex.stopwords),
                                             sorted_pool(lex.dalechall), spec);

  MaskingPolicy policy = MaskingPolicy::kidlm_plus(42);
  std::size_t total[3] = {0, 0, 0};
  std::size_t masked[3] = {0, 0, 0};
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    TokenizedSequence seq = seq_of("s" + std::to_string(i), sentences[i]);
    MaskedExample ex = mask_sequence(seq, lex, policy, i);
    for (std::size_t t = 0; t < seq.tokens.size(); ++t)
      total[static_cast<int>(classify_word(seq.tokens[t], lex))]++;
    for (const auto& [pos, stratum] : ex.strata)
      masked[static_cast<int>(stratum)]++;
  }
  const double expected[3] = {0.15, 0.20, 0.25};
  for (int s = 0; s < 3; ++s) {
    REQUIRE(total[s] >= 90000);
    double rate = static_cast<double>(masked[s]) / static_cast<double>(total[s]);
    double sigma = std::sqrt(expected[s] * (1 - expected[s]) /
                             static_cast<double>(total[s]));
    CHECK(std::abs(rate - expected[s]) <= 3 * sigma);
    CHECK(std::abs(rate - expected[s]) <= 0.01);
  }
}

TEST_CASE("determinism: identical inputs give identical examples across threads") {
  const StrataLexicon& lex = bundled_lexicon();
  MaskingPolicy policy = MaskingPolicy::kidlm_plus(99);
  TokenizedSequence seq =
      seq_of("s", {"children", "love", "stories", "about", "dinosaurs",
                   "and", "faraway", "places"});

  MaskedExample reference = mask_sequence(seq, lex, policy, 3);
  std::vector<std::future<MaskedExample>> futures;
  for (int t = 0; t < 8; ++t) {
    futures.push_back(std::async(std::launch::async, [&] {
      return mask_sequence(seq, lex, policy, 3);
    }));
  }
  for (auto& f : futures) {
    MaskedExample ex = f.get();
    CHECK(ex.tokens == reference.tokens);
    CHECK(ex.mask_positions == reference.mask_positions);
    CHECK(ex.labels == reference.labels);
  }
}

TEST_CASE("whole-word atomicity over multi-token spans") {
  TokenizedSequence seq;
  seq.id = "sub";
  seq.tokens = {"but", "ter", "fly", "the", "space", "ship"};
  seq.word_spans = {{0, 3, "butterfly"}, {3, 4, "the"}, {5, 6, "ship"}};
  // deliberately broken tiling: gap at token 4
  CHECK_THROWS_AS(seq.validate(), Error);

  seq.word_spans = {{0, 3, "butterfly"}, {3, 4, "the"}, {4, 6, "spaceship"}};
  seq.validate();

  MaskingPolicy policy = MaskingPolicy::kidlm_plus(11);
  for (std::uint64_t example = 0; example < 200; ++example) {
    MaskedExample ex = mask_sequence(seq, bundled_lexicon(), policy, example);
    std::map<std::size_t, bool> masked;
    for (std::size_t pos : ex.mask_positions) masked[pos] = true;
    for (const WordSpan& span : seq.word_spans) {
      bool any = false, all = true;
      for (std::size_t pos = span.begin; pos < span.end; ++pos) {
        if (masked.count(pos)) {
          any = true;
        } else {
          all = false;
        }
      }
      CHECK(any == all);  // no partial-word masks
    }
  }
}

TEST_CASE("uniform policy reduces to uniform random masking") {
  const StrataLexicon& lex = bundled_lexicon();
  MaskingPolicy policy = MaskingPolicy::kidlm(2024);
  for (std::uint64_t example = 0; example < 500; ++example) {
    TokenizedSequence seq =
        seq_of("s", {"she", "saw", "a", "tiny", "butterfly", "yesterday",
                     "near", "spaghetti", "x9"});
    MaskedExample ex = mask_sequence(seq, lex, policy, example);
    // independent uniform masker over the same counter stream
    std::vector<std::size_t> expected;
    for (std::size_t si = 0; si < seq.word_spans.size(); ++si) {
      if (rng::uniform(2024, example, si * 4 + 0, 0) < 0.15)
        expected.push_back(si);
    }
    CHECK(ex.mask_positions == expected);
  }
}

TEST_CASE("expected mask fraction") {
  // 0.15*0.4593 + 0.20*0.2182 + 0.25*0.3245 = 0.19366 exactly
  StrataProportions props{0.4593, 0.2182, 0.3245};
  MaskingPolicy plus = MaskingPolicy::kidlm_plus();
  CHECK(expected_mask_fraction(props, plus) ==
        doctest::Approx(0.19366).epsilon(1e-9));

  // a constant policy returns that constant for proportions that sum to 1
  MaskingPolicy base = MaskingPolicy::kidlm();
  StrataProportions normalized{0.5, 0.3, 0.2};
  CHECK(expected_mask_fraction(normalized, base) == doctest::Approx(0.15));
  StrataProportions single{1.0, 0.0, 0.0};
  CHECK(expected_mask_fraction(single, plus) == doctest::Approx(0.15));
}

TEST_CASE("mlm loss: perfect predictor scores zero") {
  MaskedExample ex;
  ex.id = "e";
  ex.tokens = {"[MASK]", "b"};
  ex.mask_positions = {0};
  ex.labels[0] = "a";
  ex.strata[0] = Stratum::Other;
  ScoredDistribution d;
  d.position = 0;
  d.entries = {{"a", 0.0}};  // log 1
  CHECK(mlm_loss(ex, {d}) == doctest::Approx(0.0));
}

TEST_CASE("mlm loss: uniform distributions give ln V") {
  MaskedExample ex;
  ex.id = "e";
  ex.tokens = {"[MASK]", "[MASK]", "c"};
  ex.mask_positions = {0, 1};
  ex.labels[0] = "w1";
  ex.labels[1] = "w3";
  ex.strata[0] = ex.strata[1] = Stratum::Other;
  std::vector<ScoredDistribution> dists = {uniform_dist(0, 7), uniform_dist(1, 7)};
  CHECK(mlm_loss(ex, dists) == doctest::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("mlm loss: hand-computed three-position case") {
  MaskedExample ex;
  ex.id = "e";
  ex.tokens = {"[MASK]", "[MASK]", "[MASK]"};
  ex.mask_positions = {0, 1, 2};
  ex.labels = {{0, "a"}, {1, "b"}, {2, "c"}};
  ex.strata = {{0, Stratum::Other}, {1, Stratum::Other}, {2, Stratum::Other}};
  auto dist = [](std::size_t pos, double p_label, const std::string& label) {
    ScoredDistribution d;
    d.position = pos;
    d.entries = {{label, std::log(p_label)}, {"other", std::log(1 - p_label)}};
    d.sort_entries();
    return d;
  };
  std::vector<ScoredDistribution> dists = {dist(0, 0.5, "a"), dist(1, 0.25, "b"),
                                           dist(2, 0.125, "c")};
  double expected = (std::log(2.0) + std::log(4.0) + std::log(8.0)) / 3.0;
  CHECK(mlm_loss(ex, dists) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(mlm_loss(ex, dists) == doctest::Approx(1.3862943611).epsilon(1e-9));
  CHECK(mlm_loss(ex, dists) ==
        doctest::Approx(brute_force_loss(ex, dists)).epsilon(1e-12));
}

TEST_CASE("mlm loss errors") {
  MaskedExample ex;
  ex.id = "e";
  ex.tokens = {"[MASK]"};
  ex.mask_positions = {0};
  ex.labels[0] = "a";
  ex.strata[0] = Stratum::Other;

  SUBCASE("missing label token") {
    ScoredDistribution d;
    d.position = 0;
    d.entries = {{"b", 0.0}};
    CHECK_THROWS_AS(mlm_loss(ex, {d}), Error);
  }
  SUBCASE("position mismatch") {
    ScoredDistribution d;
    d.position = 2;
    d.entries = {{"a", 0.0}};
    CHECK_THROWS_AS(mlm_loss(ex, {d}), Error);
  }
  SUBCASE("count mismatch") {
    CHECK_THROWS_AS(mlm_loss(ex, {}), Error);
  }
}

TEST_CASE("masked example JSONL round-trip") {
  const StrataLexicon& lex = bundled_lexicon();
  MaskingPolicy policy = MaskingPolicy::kidlm_plus(5);
  for (std::uint64_t i = 0; i < 200; ++i) {
    TokenizedSequence seq = seq_of(
        "ex" + std::to_string(i),
        {"the", "dog", "chased", "a", "butterfly", "x" + std::to_string(i)});
    MaskedExample ex = mask_sequence(seq, lex, policy, i);
    MaskedExample back = masked_example_from_json(masked_example_to_json(ex));
    CHECK(back.id == ex.id);
    CHECK(back.tokens == ex.tokens);
    CHECK(back.mask_positions == ex.mask_positions);
    CHECK(back.labels == ex.labels);
    CHECK(back.strata == ex.strata);
    // encoding is stable: decode(encode(x)) re-encodes identically
    CHECK(masked_example_to_json(back) == masked_example_to_json(ex));
  }
}

TEST_CASE("pre-tokenized sequence JSONL round-trip") {
  TokenizedSequence seq;
  seq.id = "sub";
  seq.tokens = {"but", "ter", "fly"};
  seq.word_spans = {{0, 3, "butterfly"}};
  TokenizedSequence back = tokenized_sequence_from_json(tokenized_sequence_to_json(seq));
  CHECK(back.id == seq.id);
  CHECK(back.tokens == seq.tokens);
  REQUIRE(back.word_spans.size() == 1);
  CHECK(back.word_spans[0].word == "butterfly");
  CHECK_THROWS_AS(tokenized_sequence_from_json("{\"id\":\"x\"}"), Error);
}

TEST_CASE("bert-style corruption keeps labels for every drawn word") {
  const StrataLexicon& lex = bundled_lexicon();
  MaskingPolicy policy = MaskingPolicy::kidlm_plus(31);
  policy.corruption = CorruptionMode::Bert801010;
  std::size_t masked = 0, kept_or_random = 0;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    TokenizedSequence seq =
        seq_of("s", {"children", "read", "the", "amazing", "book", "today"});
    MaskedExample ex = mask_sequence(seq, lex, policy, i);
    for (std::size_t pos : ex.mask_positions) {
      CHECK(ex.labels.count(pos) == 1);
      if (ex.tokens[pos] == policy.mask_token) {
        ++masked;
      } else {
        ++kept_or_random;
      }
    }
  }
  // roughly 80/20 between mask and keep-or-random actions
  double frac = static_cast<double>(masked) /
                static_cast<double>(masked + kept_or_random);
  CHECK(frac > 0.72);
  CHECK(frac < 0.88);
}
