#pragma once

#include <map>
#include <string>
#include <vector>

#include "kidlmforge/filters.hpp"

namespace kidlm {

// Character-trigram profile classifier over a small bundled profile set
// (en/fr/de/es/hi). Confidence is the normalized posterior of the winning
// language given uniform priors, so longer texts give sharper verdicts.
class TrigramLanguageDetector : public LanguageDetector {
 public:
  TrigramLanguageDetector();

  LanguageVerdict detect(std::string_view text) const override;

  // languages in profile order (ISO-639-1 codes)
  std::vector<std::string> languages() const;

 private:
  struct Profile {
    std::string code;
    std::map<std::u32string, double> log_prob;  // smoothed trigram log-probs
    double log_unseen = 0;                      // smoothed mass for misses
  };
  std::vector<Profile> profiles_;
};

}  // namespace kidlm
