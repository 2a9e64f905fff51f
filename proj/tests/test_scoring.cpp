#include <doctest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>

#include "kidlmforge/remote.hpp"
#include "kidlmforge/rng.hpp"
#include "kidlmforge/scoring.hpp"
#include "test_util.hpp"

using namespace kidlm;

namespace {

DocumentSet corpus_from(const std::string& text) {
  DocumentSet docs;
  Document d;
  d.id = "c0";
  d.source = "toy";
  d.text = text;
  docs.docs.push_back(std::move(d));
  return docs;
}

double exp_sum(const ScoredDistribution& dist) {
  double s = 0;
  for (const auto& [tok, lp] : dist.entries) s += std::exp(lp);
  return s;
}

double entry_prob(const ScoredDistribution& dist, const std::string& token) {
  for (const auto& [tok, lp] : dist.entries)
    if (tok == token) return std::exp(lp);
  return 0.0;
}

}  // namespace

TEST_CASE("unigram probability matches hand arithmetic") {
  auto scorer = fit_reference_scorer(corpus_from("a b a b"), 1.0);
  // vocab {a, b, <unk>}: p(a) = (2+1)/(4+3)
  CHECK(scorer->vocabulary().size() == 3);
  CHECK(scorer->unigram_prob("a") == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(scorer->unigram_prob("b") == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(scorer->unigram_prob("<unk>") == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("masked distribution matches the brute-force count table") {
  // corpus "a b a b" => one sentence, bigram counts:
  //   <s>->a:1, a->b:2, b->a:1, b-></s>:1 ; unigrams a:2 b:2, N=4
  auto scorer = fit_reference_scorer(corpus_from("a b a b"), 1.0);
  const double V = 3.0;        // a, b, <unk>
  const double T = V + 1.0;    // + </s> as a bigram target
  auto uni = [&](double c) { return (c + 1.0) / (4.0 + V); };
  auto big_a = [&](double c) { return (c + 1.0) / (2.0 + T); };  // ctx a, total 2

  // query "a [MASK]": left context a, right context </s>
  // weight(v) = p_int(v|a) * p_big(</s>|v)
  auto p_int_a = [&](double big_count, double uni_count) {
    return 0.7 * big_a(big_count) + 0.3 * uni(uni_count);
  };
  double w_a = p_int_a(0, 2) * ((0 + 1.0) / (2.0 + T));  // a-></s> c=0
  double w_b = p_int_a(2, 2) * ((1 + 1.0) / (2.0 + T));  // b-></s> c=1
  double w_u = p_int_a(0, 0) * ((0 + 1.0) / (0.0 + T));
  double z = w_a + w_b + w_u;

  auto dists = score_masked(*scorer, {"a", "[MASK]"}, {1});
  REQUIRE(dists.size() == 1);
  CHECK(entry_prob(dists[0], "a") == doctest::Approx(w_a / z).epsilon(1e-12));
  CHECK(entry_prob(dists[0], "b") == doctest::Approx(w_b / z).epsilon(1e-12));
  CHECK(entry_prob(dists[0], "<unk>") == doctest::Approx(w_u / z).epsilon(1e-12));
  // b dominates: it follows "a" twice in the corpus
  CHECK(dists[0].entries[0].first == "b");
}

TEST_CASE("distributions normalize to one") {
  auto scorer = fit_reference_scorer(
      corpus_from("the cat sat on the mat. the dog ran in the park."), 1.0);
  for (auto& tokens : std::vector<std::vector<std::string>>{
           {"[MASK]"},
           {"the", "[MASK]"},
           {"[MASK]", "cat"},
           {"the", "[MASK]", "sat"},
       }) {
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i] == "[MASK]") positions.push_back(i);
    for (const auto& dist : score_masked(*scorer, tokens, positions)) {
      CHECK(exp_sum(dist) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(dist.total_mass == doctest::Approx(1.0));
    }
  }
  ScoredDistribution prefix = scorer->score_prefix({"the"});
  CHECK(exp_sum(prefix) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("reference scorer is bitwise reproducible") {
  auto a = fit_reference_scorer(corpus_from("kids love stories about dinosaurs"), 1.0);
  auto b = fit_reference_scorer(corpus_from("kids love stories about dinosaurs"), 1.0);
  auto da = score_masked(*a, {"kids", "[MASK]"}, {1});
  auto db = score_masked(*b, {"kids", "[MASK]"}, {1});
  REQUIRE(da[0].entries.size() == db[0].entries.size());
  for (std::size_t i = 0; i < da[0].entries.size(); ++i) {
    CHECK(da[0].entries[i].first == db[0].entries[i].first);
    CHECK(da[0].entries[i].second == db[0].entries[i].second);  // bitwise
  }
}

TEST_CASE("adding occurrences of a token never lowers its unigram score") {
  std::string text = "apple banana cherry";
  double prev = 0;
  for (int reps = 1; reps <= 6; ++reps) {
    text += " apple";
    auto scorer = fit_reference_scorer(corpus_from(text), 1.0);
    double p = scorer->unigram_prob("apple");
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("score_masked contract checks") {
  auto scorer = fit_reference_scorer(corpus_from("a b c"), 1.0);
  CHECK_THROWS_AS(score_masked(*scorer, {"a", "b"}, {5}), Error);
  CHECK_THROWS_AS(score_masked(*scorer, {"a", "b"}, {1}), Error);  // not a mask
  CHECK(score_masked(*scorer, {"a", "b"}, {}).empty());

  auto two = score_masked(*scorer, {"[MASK]", "b", "[MASK]"}, {0, 2});
  REQUIRE(two.size() == 2);
  CHECK(two[0].position == 0);
  CHECK(two[1].position == 2);
}

TEST_CASE("empty corpus and bad smoothing are errors") {
  CHECK_THROWS_AS(fit_reference_scorer(DocumentSet{}, 1.0), Error);
  CHECK_THROWS_AS(fit_reference_scorer(corpus_from("a"), 0.0), Error);
  CHECK_THROWS_AS(fit_reference_scorer(corpus_from("a"), -1.0), Error);
}

TEST_CASE("truncation keeps rank order and reported mass") {
  auto scorer = fit_reference_scorer(corpus_from("a b c d e f g"), 1.0);
  auto dist = score_masked(*scorer, {"a", "[MASK]"}, {1})[0];
  auto top3 = dist.truncated(3);
  CHECK(top3.entries.size() == 3);
  CHECK(top3.total_mass == doctest::Approx(1.0));
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(top3.entries[i].first == dist.entries[i].first);
  CHECK_THROWS_AS(dist.truncated(0), Error);
}

TEST_CASE("protocol: decode(encode(x)) == x over generated requests") {
  for (std::uint64_t case_id = 0; case_id < 500; ++case_id) {
    std::vector<MaskedQuery> queries;
    std::size_t n = 1 + rng::below(4, 1, case_id, 0, 0);
    for (std::size_t q = 0; q < n; ++q) {
      MaskedQuery query;
      query.id = "q" + std::to_string(case_id) + "-" + std::to_string(q);
      std::size_t len = 1 + rng::below(9, 2, case_id, q, 0);
      for (std::size_t t = 0; t < len; ++t) {
        if (rng::uniform(3, case_id, q, t) < 0.25) {
          query.tokens.push_back("[MASK]");
          query.mask_positions.push_back(t);
        } else {
          query.tokens.push_back(
              "tok" + std::to_string(rng::below(50, 4, case_id, q + 7, t)));
        }
      }
      queries.push_back(std::move(query));
    }
    std::size_t top_m = 1 + rng::below(64, 5, case_id, 0, 0);
    auto [back, back_top_m] = decode_masked_request(encode_masked_request(queries, top_m));
    CHECK(back_top_m == top_m);
    REQUIRE(back.size() == queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
      CHECK(back[q].id == queries[q].id);
      CHECK(back[q].tokens == queries[q].tokens);
      CHECK(back[q].mask_positions == queries[q].mask_positions);
    }
    // responses round-trip as well
    std::vector<std::pair<std::string, std::vector<ScoredDistribution>>> results;
    for (const auto& q : queries) {
      std::vector<ScoredDistribution> dists;
      for (std::size_t pos : q.mask_positions) {
        ScoredDistribution d;
        d.position = pos;
        double lp = 0;
        for (int e = 0; e < 3; ++e) {
          lp -= rng::uniform(6, case_id, pos, e) + 0.01;
          d.entries.emplace_back("w" + std::to_string(e), lp);
        }
        dists.push_back(std::move(d));
      }
      results.emplace_back(q.id, std::move(dists));
    }
    auto decoded = decode_masked_response(encode_masked_response(results));
    REQUIRE(decoded.size() == results.size());
    for (std::size_t r = 0; r < results.size(); ++r) {
      CHECK(decoded[r].first == results[r].first);
      REQUIRE(decoded[r].second.size() == results[r].second.size());
      for (std::size_t d = 0; d < results[r].second.size(); ++d) {
        CHECK(decoded[r].second[d].entries == results[r].second[d].entries);
      }
    }
  }
}

TEST_CASE("protocol: golden fixture pair round-trips byte-exact") {
  std::string request = test::read_file(test::golden_path("remote_request.json"));
  std::string response = test::read_file(test::golden_path("remote_response.json"));
  REQUIRE(!request.empty());
  REQUIRE(!response.empty());
  // strip the trailing newline the files carry
  if (request.back() == '\n') request.pop_back();
  if (response.back() == '\n') response.pop_back();

  auto [queries, top_m] = decode_masked_request(request);
  CHECK(encode_masked_request(queries, top_m) == request);
  auto results = decode_masked_response(response);
  CHECK(encode_masked_response(results) == response);
}

namespace {

// in-process scorer service used by the client tests
class TestServer {
 public:
  explicit TestServer(ReferenceScorerPtr scorer) : scorer_(std::move(scorer)) {
    server_.Post("/v1/score_masked", [this](const httplib::Request& req,
                                            httplib::Response& res) {
      if (delay_ms_ > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      if (fail_next_with_ > 0) {
        res.status = fail_next_with_;
        fail_next_with_ = 0;
        return;
      }
      if (drop_first_result_) seen_auth_ = req.get_header_value("Authorization");
      auto [queries, top_m] = decode_masked_request(req.body);
      std::vector<std::pair<std::string, std::vector<ScoredDistribution>>> results;
      for (const auto& q : queries) {
        if (drop_first_result_ && results.empty() && !dropped_once_) {
          dropped_once_ = true;
          continue;  // simulate a missing per-query response
        }
        auto dists = scorer_->score_masked(q.tokens, q.mask_positions);
        for (auto& d : dists) d = d.truncated(top_m);
        results.emplace_back(q.id, std::move(dists));
      }
      res.set_content(encode_masked_response(results), "application/json");
    });
    server_.Post("/v1/score_prefix", [this](const httplib::Request& req,
                                            httplib::Response& res) {
      auto [queries, top_m] = decode_prefix_request(req.body);
      std::vector<std::pair<std::string, std::vector<ScoredDistribution>>> results;
      for (const auto& q : queries) {
        std::vector<ScoredDistribution> one = {
            scorer_->score_prefix(q.prefix_tokens).truncated(top_m)};
        results.emplace_back(q.id, std::move(one));
      }
      res.set_content(encode_masked_response(results), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~TestServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }
  void fail_next_with(int status) { fail_next_with_ = status; }
  void delay_responses(int ms) { delay_ms_ = ms; }
  void drop_first_result() { drop_first_result_ = true; }
  const std::string& seen_auth() const { return seen_auth_; }

 private:
  ReferenceScorerPtr scorer_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int fail_next_with_ = 0;
  int delay_ms_ = 0;
  bool drop_first_result_ = false;
  bool dropped_once_ = false;
  std::string seen_auth_;
};

}  // namespace

TEST_CASE("remote_score: end-to-end against an in-process server") {
  auto scorer = fit_reference_scorer(
      corpus_from("the cat sat on the mat. the dog ran fast."), 1.0);
  TestServer server(scorer);

  std::vector<MaskedQuery> batch;
  for (int q = 0; q < 40; ++q) {
    batch.push_back({"q" + std::to_string(q), {"the", "[MASK]"}, {1}});
  }
  RemoteLimits limits;
  limits.max_batch = 7;
  limits.max_in_flight = 3;
  auto outcomes = remote_score(server.endpoint(), batch, limits, 5);
  REQUIRE(outcomes.size() == batch.size());
  auto local = score_masked(*scorer, {"the", "[MASK]"}, {1})[0].truncated(5);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    CHECK(outcomes[i].id == batch[i].id);
    REQUIRE(!outcomes[i].error);
    REQUIRE(outcomes[i].distributions.size() == 1);
    CHECK(outcomes[i].distributions[0].entries == local.entries);
  }
}

TEST_CASE("remote_score: per-query missing-response error") {
  auto scorer = fit_reference_scorer(corpus_from("a b c d"), 1.0);
  TestServer server(scorer);
  server.drop_first_result();

  std::vector<MaskedQuery> batch = {
      {"first", {"a", "[MASK]"}, {1}},
      {"second", {"b", "[MASK]"}, {1}},
  };
  RemoteLimits limits;
  auto outcomes = remote_score(server.endpoint(), batch, limits, 3);
  REQUIRE(outcomes.size() == 2);
  CHECK(outcomes[0].error == "missing-response");
  CHECK(!outcomes[1].error);
}

TEST_CASE("remote_score: empty batch is a precondition error") {
  RemoteLimits limits;
  CHECK_THROWS_WITH_AS(remote_score("http://127.0.0.1:1", {}, limits, 5),
                       "remote_score requires a non-empty batch", Error);
}

TEST_CASE("remote_score: client errors surface per query without retry") {
  auto scorer = fit_reference_scorer(corpus_from("a b"), 1.0);
  TestServer server(scorer);
  server.fail_next_with(400);
  std::vector<MaskedQuery> batch = {{"q", {"a", "[MASK]"}, {1}}};
  RemoteLimits limits;
  limits.retries = 2;
  auto outcomes = remote_score(server.endpoint(), batch, limits, 3);
  CHECK(outcomes[0].error == "http-400");
}

TEST_CASE("remote_score: 5xx retries then succeeds") {
  auto scorer = fit_reference_scorer(corpus_from("a b"), 1.0);
  TestServer server(scorer);
  server.fail_next_with(503);
  std::vector<MaskedQuery> batch = {{"q", {"a", "[MASK]"}, {1}}};
  RemoteLimits limits;
  limits.retries = 2;
  auto outcomes = remote_score(server.endpoint(), batch, limits, 3);
  CHECK(!outcomes[0].error);  // the retry recovered
}

TEST_CASE("remote_score: slow server surfaces per-query timeouts") {
  auto scorer = fit_reference_scorer(corpus_from("a b"), 1.0);
  TestServer server(scorer);
  server.delay_responses(1500);
  std::vector<MaskedQuery> batch = {{"q", {"a", "[MASK]"}, {1}}};
  RemoteLimits limits;
  limits.timeout_ms = 200;
  limits.retries = 0;
  auto outcomes = remote_score(server.endpoint(), batch, limits, 3);
  REQUIRE(outcomes.size() == 1);
  REQUIRE(outcomes[0].error.has_value());
  CHECK(*outcomes[0].error == "timeout");
}

TEST_CASE("remote_score: unreachable endpoint gives per-query transport errors") {
  std::vector<MaskedQuery> batch = {{"q", {"a", "[MASK]"}, {1}}};
  RemoteLimits limits;
  limits.timeout_ms = 300;
  limits.retries = 0;
  auto outcomes = remote_score("http://127.0.0.1:9", batch, limits, 3);
  REQUIRE(outcomes.size() == 1);
  CHECK(outcomes[0].error.has_value());
}

TEST_CASE("RemoteScorer adapter and prefix endpoint") {
  auto scorer = fit_reference_scorer(
      corpus_from("kids love chocolate cake. kids love stories."), 1.0);
  TestServer server(scorer);
  RemoteLimits limits;
  RemoteScorer remote(server.endpoint(), limits, "[MASK]", 10);

  auto dists = remote.score_masked({"kids", "[MASK]"}, {1});
  REQUIRE(dists.size() == 1);
  auto local = score_masked(*scorer, {"kids", "[MASK]"}, {1})[0].truncated(10);
  CHECK(dists[0].entries == local.entries);

  auto prefix = remote.score_prefix({"kids"});
  auto local_prefix = scorer->score_prefix({"kids"}).truncated(10);
  CHECK(prefix.entries == local_prefix.entries);
}
