#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kidlmforge/types.hpp"

namespace kidlm {

struct ScoredDistribution {
  std::size_t position = 0;
  // (token, log-probability), non-increasing in log-probability; ties are
  // ordered by ascending token for determinism
  std::vector<std::pair<std::string, double>> entries;
  // exp-sum of the full distribution this was truncated from
  double total_mass = 1.0;

  ScoredDistribution truncated(std::size_t top_m) const;
  void sort_entries();
};

struct ScorerCaps {
  std::size_t vocab_size = 0;
  std::string mask_token = "[MASK]";
  std::size_t max_seq_len = 512;
};

class MaskedScorer {
 public:
  virtual ~MaskedScorer() = default;
  virtual ScorerCaps caps() const = 0;
  // One full-vocabulary distribution per masked position, in input order.
  virtual std::vector<ScoredDistribution> score_masked(
      const std::vector<std::string>& tokens,
      const std::vector<std::size_t>& mask_positions) const = 0;
};

class PrefixScorer {
 public:
  virtual ~PrefixScorer() = default;
  virtual ScorerCaps caps() const = 0;
  // Distribution over the next token after the prefix.
  virtual ScoredDistribution score_prefix(
      const std::vector<std::string>& prefix_tokens) const = 0;
};

struct ReferenceScorerOptions {
  double smoothing = 1.0;      // additive constant, must be > 0
  double bigram_weight = 0.7;  // interpolation: w*bigram + (1-w)*unigram
  std::string mask_token = "[MASK]";
};

// Interpolated unigram/bigram model with additive smoothing over a closed
// vocabulary (corpus types + "<unk>"). Masked positions are scored by the
// product of left- and right-context likelihoods, renormalized. Exactly
// reproducible: same corpus + options give bitwise-identical log-probs.
class ReferenceScorer : public MaskedScorer, public PrefixScorer {
 public:
  ReferenceScorer(const DocumentSet& corpus, ReferenceScorerOptions options);

  ScorerCaps caps() const override;
  std::vector<ScoredDistribution> score_masked(
      const std::vector<std::string>& tokens,
      const std::vector<std::size_t>& mask_positions) const override;
  ScoredDistribution score_prefix(
      const std::vector<std::string>& prefix_tokens) const override;

  // smoothed building blocks, exposed so tests can cross-check by hand
  double unigram_prob(const std::string& word) const;
  double bigram_prob(const std::string& context, const std::string& next) const;
  double interpolated_prob(const std::string& context,
                           const std::string& next) const;
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  static const std::string kUnk;  // "<unk>"
  static const std::string kBos;  // "<s>"
  static const std::string kEos;  // "</s>"

 private:
  std::string canonical(const std::string& token) const;

  ReferenceScorerOptions options_;
  std::vector<std::string> vocab_;                 // sorted, includes <unk>
  std::map<std::string, std::size_t> unigram_;     // token counts
  std::size_t total_tokens_ = 0;
  std::map<std::string, std::map<std::string, std::size_t>> bigram_;
  std::map<std::string, std::size_t> context_total_;
};

using ReferenceScorerPtr = std::shared_ptr<ReferenceScorer>;

// Fits the in-repo statistical scorer; the desk-scale stand-in for a
// trained model behind the same interface.
// Throws Error("empty-corpus") / Error("config") on bad inputs.
ReferenceScorerPtr fit_reference_scorer(const DocumentSet& corpus,
                                        double smoothing = 1.0);
ReferenceScorerPtr fit_reference_scorer(const DocumentSet& corpus,
                                        const ReferenceScorerOptions& options);

// Contract wrapper: validates that every queried position is in range and
// holds the scorer's mask token, then forwards to the scorer.
std::vector<ScoredDistribution> score_masked(
    const MaskedScorer& scorer, const std::vector<std::string>& tokens,
    const std::vector<std::size_t>& mask_positions);

}  // namespace kidlm
