#include "kidlmforge/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "kidlmforge/corpus.hpp"
#include "kidlmforge/strata.hpp"
#include "kidlmforge/text.hpp"

namespace kidlm {

const std::string ReferenceScorer::kUnk = "<unk>";
const std::string ReferenceScorer::kBos = "<s>";
const std::string ReferenceScorer::kEos = "</s>";

void ScoredDistribution::sort_entries() {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
}

ScoredDistribution ScoredDistribution::truncated(std::size_t top_m) const {
  if (top_m == 0) throw Error("config", "top_m must be >= 1");
  ScoredDistribution out = *this;
  if (out.entries.size() > top_m) out.entries.resize(top_m);
  return out;
}

ReferenceScorer::ReferenceScorer(const DocumentSet& corpus,
                                 ReferenceScorerOptions options)
    : options_(std::move(options)) {
  if (options_.smoothing <= 0.0)
    throw Error("config", "smoothing must be > 0");
  if (options_.bigram_weight < 0.0 || options_.bigram_weight > 1.0)
    throw Error("config", "bigram weight must be in [0,1]");

  for (const Document& doc : corpus.docs) {
    for (const Sentence& sentence : segment_sentences(doc)) {
      std::vector<std::string> words;
      for (const std::string& raw : word_segment(sentence.text)) {
        std::string w = normalize_word(raw);
        if (!w.empty()) words.push_back(std::move(w));
      }
      if (words.empty()) continue;
      std::string prev = kBos;
      for (const std::string& w : words) {
        unigram_[w]++;
        total_tokens_++;
        bigram_[prev][w]++;
        context_total_[prev]++;
        prev = w;
      }
      bigram_[prev][kEos]++;
      context_total_[prev]++;
    }
  }
  if (total_tokens_ == 0)
    throw Error("empty-corpus", "reference scorer needs a non-empty corpus");

  for (const auto& [word, count] : unigram_) vocab_.push_back(word);
  vocab_.push_back(kUnk);
  std::sort(vocab_.begin(), vocab_.end());
}

std::string ReferenceScorer::canonical(const std::string& token) const {
  std::string w = normalize_word(token);
  if (w.empty() || !unigram_.count(w)) return kUnk;
  return w;
}

ScorerCaps ReferenceScorer::caps() const {
  return {vocab_.size(), options_.mask_token, 512};
}

double ReferenceScorer::unigram_prob(const std::string& word) const {
  double alpha = options_.smoothing;
  double v = static_cast<double>(vocab_.size());
  auto it = unigram_.find(word);
  double c = it == unigram_.end() ? 0.0 : static_cast<double>(it->second);
  return (c + alpha) / (static_cast<double>(total_tokens_) + alpha * v);
}

double ReferenceScorer::bigram_prob(const std::string& context,
                                    const std::string& next) const {
  double alpha = options_.smoothing;
  // target space is the vocabulary plus the end sentinel
  double targets = static_cast<double>(vocab_.size()) + 1.0;
  double c = 0.0, ctx_total = 0.0;
  if (auto it = bigram_.find(context); it != bigram_.end()) {
    if (auto jt = it->second.find(next); jt != it->second.end())
      c = static_cast<double>(jt->second);
  }
  if (auto it = context_total_.find(context); it != context_total_.end())
    ctx_total = static_cast<double>(it->second);
  return (c + alpha) / (ctx_total + alpha * targets);
}

double ReferenceScorer::interpolated_prob(const std::string& context,
                                          const std::string& next) const {
  double w = options_.bigram_weight;
  return w * bigram_prob(context, next) + (1.0 - w) * unigram_prob(next);
}

namespace {

ScoredDistribution normalize_weights(
    std::size_t position, const std::vector<std::string>& vocab,
    const std::vector<double>& weights) {
  double z = 0;
  for (double w : weights) z += w;
  ScoredDistribution dist;
  dist.position = position;
  dist.entries.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i)
    dist.entries.emplace_back(vocab[i], std::log(weights[i] / z));
  dist.total_mass = 1.0;
  dist.sort_entries();
  return dist;
}

}  // namespace

std::vector<ScoredDistribution> ReferenceScorer::score_masked(
    const std::vector<std::string>& tokens,
    const std::vector<std::size_t>& mask_positions) const {
  std::vector<ScoredDistribution> out;
  out.reserve(mask_positions.size());
  const std::string& mask = options_.mask_token;

  for (std::size_t pos : mask_positions) {
    if (pos >= tokens.size())
      throw Error("bad-position", "mask position out of range");

    // neighbors that are themselves masked give no context
    bool has_left = true;
    std::string left;
    if (pos == 0) {
      left = kBos;
    } else if (tokens[pos - 1] == mask) {
      has_left = false;
    } else {
      left = canonical(tokens[pos - 1]);
    }
    bool has_right = true;
    std::string right;
    if (pos + 1 == tokens.size()) {
      right = kEos;
    } else if (tokens[pos + 1] == mask) {
      has_right = false;
    } else {
      right = canonical(tokens[pos + 1]);
    }

    std::vector<double> weights;
    weights.reserve(vocab_.size());
    for (const std::string& v : vocab_) {
      double w = has_left ? interpolated_prob(left, v) : unigram_prob(v);
      if (has_right) {
        w *= right == kEos ? bigram_prob(v, kEos) : interpolated_prob(v, right);
      }
      weights.push_back(w);
    }
    out.push_back(normalize_weights(pos, vocab_, weights));
  }
  return out;
}

ScoredDistribution ReferenceScorer::score_prefix(
    const std::vector<std::string>& prefix_tokens) const {
  std::string context =
      prefix_tokens.empty() ? kBos : canonical(prefix_tokens.back());
  std::vector<double> weights;
  weights.reserve(vocab_.size());
  for (const std::string& v : vocab_) weights.push_back(interpolated_prob(context, v));
  return normalize_weights(prefix_tokens.size(), vocab_, weights);
}

ReferenceScorerPtr fit_reference_scorer(const DocumentSet& corpus,
                                        double smoothing) {
  ReferenceScorerOptions options;
  options.smoothing = smoothing;
  return fit_reference_scorer(corpus, options);
}

ReferenceScorerPtr fit_reference_scorer(const DocumentSet& corpus,
                                        const ReferenceScorerOptions& options) {
  return std::make_shared<ReferenceScorer>(corpus, options);
}

std::vector<ScoredDistribution> score_masked(
    const MaskedScorer& scorer, const std::vector<std::string>& tokens,
    const std::vector<std::size_t>& mask_positions) {
  const std::string mask = scorer.caps().mask_token;
  for (std::size_t pos : mask_positions) {
    if (pos >= tokens.size())
      throw Error("bad-position",
                  "mask position " + std::to_string(pos) + " out of range");
    if (tokens[pos] != mask)
      throw Error("not-a-mask", "token at position " + std::to_string(pos) +
                                    " is not the mask token");
  }
  if (mask_positions.empty()) return {};
  return scorer.score_masked(tokens, mask_positions);
}

}  // namespace kidlm
