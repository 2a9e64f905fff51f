#include "kidlmforge/remote.hpp"

#include <atomic>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

namespace kidlm {

namespace {

using nlohmann::json;

json distribution_to_json(const ScoredDistribution& dist) {
  json arr = json::array();
  for (const auto& [token, logprob] : dist.entries) {
    arr.push_back({{"token", token}, {"logprob", logprob}});
  }
  return arr;
}

ScoredDistribution distribution_from_json(const json& arr, std::size_t position) {
  if (!arr.is_array())
    throw Error("bad-response", "distribution must be an array");
  ScoredDistribution dist;
  dist.position = position;
  for (const auto& entry : arr) {
    if (!entry.is_object() || !entry.contains("token") ||
        !entry.contains("logprob"))
      throw Error("bad-response", "distribution entry needs token and logprob");
    dist.entries.emplace_back(entry["token"].get<std::string>(),
                              entry["logprob"].get<double>());
  }
  for (std::size_t i = 0; i + 1 < dist.entries.size(); ++i) {
    if (dist.entries[i].second < dist.entries[i + 1].second)
      throw Error("bad-response", "log-probabilities must be non-increasing");
  }
  return dist;
}

}  // namespace

std::string encode_masked_request(const std::vector<MaskedQuery>& queries,
                                  std::size_t top_m) {
  json body;
  body["queries"] = json::array();
  for (const MaskedQuery& q : queries) {
    body["queries"].push_back({{"id", q.id},
                               {"tokens", q.tokens},
                               {"mask_positions", q.mask_positions}});
  }
  body["top_m"] = top_m;
  return body.dump();
}

std::pair<std::vector<MaskedQuery>, std::size_t> decode_masked_request(
    const std::string& body) {
  json obj = json::parse(body, nullptr, false);
  if (obj.is_discarded() || !obj.is_object() || !obj.contains("queries") ||
      !obj["queries"].is_array() || !obj.contains("top_m"))
    throw Error("bad-request", "malformed score_masked request");
  std::vector<MaskedQuery> queries;
  for (const auto& q : obj["queries"]) {
    MaskedQuery query;
    query.id = q.at("id").get<std::string>();
    query.tokens = q.at("tokens").get<std::vector<std::string>>();
    query.mask_positions =
        q.at("mask_positions").get<std::vector<std::size_t>>();
    queries.push_back(std::move(query));
  }
  return {std::move(queries), obj["top_m"].get<std::size_t>()};
}

std::string encode_masked_response(
    const std::vector<std::pair<std::string, std::vector<ScoredDistribution>>>&
        results) {
  json body;
  body["results"] = json::array();
  for (const auto& [id, distributions] : results) {
    json dists = json::array();
    for (const ScoredDistribution& d : distributions)
      dists.push_back(distribution_to_json(d));
    body["results"].push_back({{"id", id}, {"distributions", dists}});
  }
  return body.dump();
}

std::vector<std::pair<std::string, std::vector<ScoredDistribution>>>
decode_masked_response(const std::string& body) {
  json obj = json::parse(body, nullptr, false);
  if (obj.is_discarded() || !obj.is_object() || !obj.contains("results") ||
      !obj["results"].is_array())
    throw Error("bad-response", "malformed score_masked response");
  std::vector<std::pair<std::string, std::vector<ScoredDistribution>>> out;
  for (const auto& r : obj["results"]) {
    if (!r.is_object() || !r.contains("id") || !r.contains("distributions") ||
        !r["distributions"].is_array())
      throw Error("bad-response", "malformed result entry");
    std::vector<ScoredDistribution> dists;
    std::size_t index = 0;
    for (const auto& d : r["distributions"])
      dists.push_back(distribution_from_json(d, index++));
    out.emplace_back(r["id"].get<std::string>(), std::move(dists));
  }
  return out;
}

std::string encode_prefix_request(const std::vector<PrefixQuery>& queries,
                                  std::size_t top_m) {
  json body;
  body["queries"] = json::array();
  for (const PrefixQuery& q : queries) {
    body["queries"].push_back(
        {{"id", q.id}, {"prefix_tokens", q.prefix_tokens}});
  }
  body["top_m"] = top_m;
  return body.dump();
}

std::pair<std::vector<PrefixQuery>, std::size_t> decode_prefix_request(
    const std::string& body) {
  json obj = json::parse(body, nullptr, false);
  if (obj.is_discarded() || !obj.is_object() || !obj.contains("queries") ||
      !obj["queries"].is_array() || !obj.contains("top_m"))
    throw Error("bad-request", "malformed score_prefix request");
  std::vector<PrefixQuery> queries;
  for (const auto& q : obj["queries"]) {
    PrefixQuery query;
    query.id = q.at("id").get<std::string>();
    query.prefix_tokens = q.at("prefix_tokens").get<std::vector<std::string>>();
    queries.push_back(std::move(query));
  }
  return {std::move(queries), obj["top_m"].get<std::size_t>()};
}

namespace {

struct ParsedEndpoint {
  std::string host_port;  // scheme://host:port
  std::string base_path;  // path prefix, possibly empty
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
  std::size_t scheme = endpoint.find("://");
  std::size_t path_start =
      scheme == std::string::npos ? endpoint.find('/') : endpoint.find('/', scheme + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string path = endpoint.substr(path_start);
  if (path == "/") path.clear();
  return {endpoint.substr(0, path_start), path};
}

// One POST with retries. Returns the response body or an error string.
std::optional<std::string> post_once(const std::string& endpoint,
                                     const std::string& path,
                                     const std::string& body,
                                     const RemoteLimits& limits,
                                     std::string& error) {
  ParsedEndpoint ep = split_endpoint(endpoint);
  httplib::Client client(ep.host_port);
  client.set_connection_timeout(limits.timeout_ms / 1000,
                                (limits.timeout_ms % 1000) * 1000);
  client.set_read_timeout(limits.timeout_ms / 1000,
                          (limits.timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (limits.bearer_token)
    headers.emplace("Authorization", "Bearer " + *limits.bearer_token);

  for (int attempt = 0; attempt <= limits.retries; ++attempt) {
    auto res = client.Post(ep.base_path + path, headers, body,
                           "application/json");
    if (!res) {
      error = res.error() == httplib::Error::ConnectionTimeout ||
                      res.error() == httplib::Error::Read
                  ? "timeout"
                  : "transport";
      continue;  // idempotent, safe to retry
    }
    if (res->status >= 500) {
      error = "http-" + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      error = "http-" + std::to_string(res->status);
      return std::nullopt;  // client errors do not retry
    }
    error.clear();
    return res->body;
  }
  return std::nullopt;
}

}  // namespace

std::vector<RemoteOutcome> remote_score(const std::string& endpoint,
                                        const std::vector<MaskedQuery>& queries,
                                        const RemoteLimits& limits,
                                        std::size_t top_m) {
  if (queries.empty())
    throw Error("empty-batch", "remote_score requires a non-empty batch");

  // chunk the batch, then run chunks on a bounded worker pool
  std::vector<std::pair<std::size_t, std::size_t>> chunks;  // [begin, end)
  std::size_t step = std::max<std::size_t>(1, limits.max_batch);
  for (std::size_t begin = 0; begin < queries.size(); begin += step)
    chunks.emplace_back(begin, std::min(queries.size(), begin + step));

  std::vector<RemoteOutcome> outcomes(queries.size());
  std::atomic<std::size_t> next_chunk{0};
  std::mutex mu;

  auto worker = [&] {
    for (;;) {
      std::size_t c = next_chunk.fetch_add(1);
      if (c >= chunks.size()) return;
      auto [begin, end] = chunks[c];
      std::vector<MaskedQuery> chunk(queries.begin() + begin,
                                     queries.begin() + end);
      std::string body = encode_masked_request(chunk, top_m);
      std::string error;
      auto response = post_once(endpoint, "/v1/score_masked", body, limits, error);

      std::lock_guard<std::mutex> lock(mu);
      if (!response) {
        for (std::size_t i = begin; i < end; ++i) {
          outcomes[i].id = queries[i].id;
          outcomes[i].error = error.empty() ? "transport" : error;
        }
        continue;
      }
      std::unordered_map<std::string, std::vector<ScoredDistribution>> by_id;
      bool decoded = true;
      try {
        for (auto& [id, dists] : decode_masked_response(*response))
          by_id.emplace(id, std::move(dists));
      } catch (const Error&) {
        decoded = false;
      }
      for (std::size_t i = begin; i < end; ++i) {
        outcomes[i].id = queries[i].id;
        if (!decoded) {
          outcomes[i].error = "bad-response";
          continue;
        }
        auto it = by_id.find(queries[i].id);
        if (it == by_id.end()) {
          outcomes[i].error = "missing-response";
        } else if (it->second.size() != queries[i].mask_positions.size()) {
          outcomes[i].error = "bad-response";
        } else {
          // positions come back implicit; restore the query's own
          for (std::size_t d = 0; d < it->second.size(); ++d)
            it->second[d].position = queries[i].mask_positions[d];
          outcomes[i].distributions = std::move(it->second);
        }
      }
    }
  };

  std::size_t pool = std::max<std::size_t>(1, limits.max_in_flight);
  pool = std::min(pool, chunks.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return outcomes;
}

RemoteScorer::RemoteScorer(std::string endpoint, RemoteLimits limits,
                           std::string mask_token, std::size_t top_m)
    : endpoint_(std::move(endpoint)),
      limits_(std::move(limits)),
      mask_token_(std::move(mask_token)),
      top_m_(top_m) {}

ScorerCaps RemoteScorer::caps() const { return {0, mask_token_, 512}; }

std::vector<ScoredDistribution> RemoteScorer::score_masked(
    const std::vector<std::string>& tokens,
    const std::vector<std::size_t>& mask_positions) const {
  MaskedQuery query{"q0", tokens, mask_positions};
  auto outcomes = remote_score(endpoint_, {query}, limits_, top_m_);
  if (outcomes[0].error)
    throw Error(*outcomes[0].error, "remote scorer failed: " + *outcomes[0].error);
  return std::move(outcomes[0].distributions);
}

ScoredDistribution RemoteScorer::score_prefix(
    const std::vector<std::string>& prefix_tokens) const {
  std::vector<PrefixQuery> queries{{"q0", prefix_tokens}};
  std::string body = encode_prefix_request(queries, top_m_);
  std::string error;
  auto response = post_once(endpoint_, "/v1/score_prefix", body, limits_, error);
  if (!response)
    throw Error(error.empty() ? "transport" : error, "remote scorer failed");
  auto results = decode_masked_response(*response);
  if (results.empty() || results[0].second.size() != 1)
    throw Error("bad-response", "prefix response needs one distribution");
  ScoredDistribution dist = std::move(results[0].second[0]);
  dist.position = prefix_tokens.size();
  return dist;
}

}  // namespace kidlm
