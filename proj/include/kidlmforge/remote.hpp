#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kidlmforge/scoring.hpp"

namespace kidlm {

struct MaskedQuery {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::size_t> mask_positions;
};

struct PrefixQuery {
  std::string id;
  std::vector<std::string> prefix_tokens;
};

// Wire protocol, HTTP POST /v1/score_masked and /v1/score_prefix.
// Request:  {"queries":[{"id":str,"tokens":[str],"mask_positions":[int]}],
//            "top_m":int}
// Response: {"results":[{"id":str,"distributions":[[{"token":str,
//            "logprob":float}]]}]}
std::string encode_masked_request(const std::vector<MaskedQuery>& queries,
                                  std::size_t top_m);
std::pair<std::vector<MaskedQuery>, std::size_t> decode_masked_request(
    const std::string& body);

std::string encode_masked_response(
    const std::vector<std::pair<std::string, std::vector<ScoredDistribution>>>&
        results);
std::vector<std::pair<std::string, std::vector<ScoredDistribution>>>
decode_masked_response(const std::string& body);

std::string encode_prefix_request(const std::vector<PrefixQuery>& queries,
                                  std::size_t top_m);
std::pair<std::vector<PrefixQuery>, std::size_t> decode_prefix_request(
    const std::string& body);

struct RemoteLimits {
  std::size_t max_in_flight = 4;  // concurrent HTTP requests
  std::size_t max_batch = 16;     // queries per request
  int timeout_ms = 30000;
  int retries = 2;  // transport-level retries; requests are idempotent
  std::optional<std::string> bearer_token;
};

struct RemoteOutcome {
  std::string id;
  std::vector<ScoredDistribution> distributions;  // valid when !error
  std::optional<std::string> error;  // "timeout", "http-500", "missing-response", ...
};

// Scores a batch against a remote endpoint. Failures surface per query;
// out-of-order responses are re-sequenced to match the input order.
// Throws Error("empty-batch") when `queries` is empty.
std::vector<RemoteOutcome> remote_score(const std::string& endpoint,
                                        const std::vector<MaskedQuery>& queries,
                                        const RemoteLimits& limits,
                                        std::size_t top_m);

// Scorer-interface adapter over the wire protocol, for CLI use.
class RemoteScorer : public MaskedScorer, public PrefixScorer {
 public:
  RemoteScorer(std::string endpoint, RemoteLimits limits,
               std::string mask_token = "[MASK]", std::size_t top_m = 50);

  ScorerCaps caps() const override;
  std::vector<ScoredDistribution> score_masked(
      const std::vector<std::string>& tokens,
      const std::vector<std::size_t>& mask_positions) const override;
  ScoredDistribution score_prefix(
      const std::vector<std::string>& prefix_tokens) const override;

 private:
  std::string endpoint_;
  RemoteLimits limits_;
  std::string mask_token_;
  std::size_t top_m_;
};

}  // namespace kidlm
