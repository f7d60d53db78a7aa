#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <thread>

#include <httplib.h>

#include "atgforge/core/text.hpp"
#include "atgforge/extract/extract.hpp"
#include "atgforge/prover/mock_prover.hpp"
#include "atgforge/suggest/suggest.hpp"
#include "oracles/corpus.hpp"

using namespace atgforge;

namespace {

std::vector<StateTacticPair> seed_pairs() {
  mock::MockProver p;
  return extract_all(oracle::load_fixture("seeds.jsonl"), p).pairs;
}

}  // namespace

TEST_CASE("warmed rule suggester ranks add_zero first") {
  RuleFrequencySuggester s;
  s.refresh(seed_pairs());
  auto c = s.suggest({"x + 0 = x"}, 4);
  REQUIRE(c.size() == 4);
  CHECK(c[0].text == "rw [add_zero]");
}

TEST_CASE("suggest respects t, dedup and ordering") {
  RuleFrequencySuggester s;
  s.refresh(seed_pairs());
  auto c = s.suggest({"a * b = b * a"}, 16);
  CHECK(c.size() <= 16);
  std::set<std::string> texts;
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK_FALSE(trim(c[i].text).empty());
    texts.insert(normalize_text(c[i].text));
    if (i > 0) CHECK(c[i - 1].score >= c[i].score);
  }
  CHECK(texts.size() == c.size());
  CHECK(s.suggest({}, 4).empty());
  CHECK(s.suggest({"x = x"}, 100).size() == s.vocabulary_size());
}

TEST_CASE("scores follow add-one smoothing") {
  RuleFrequencySuggester s({"a", "b", "c"});
  std::string key = goal_feature_key({"x + 0 = x"});
  s.refresh({{"a", "n", {"x + 0 = x"}, {}}, {"a", "n", {"x + 0 = x"}, {}}, {"b", "n", {"y + 0 = y"}, {}}});
  // All three pairs share a feature key (variables are abstracted away).
  CHECK(std::abs(s.score(key, "a") - std::log(3.0 / 6.0)) < 1e-12);
  CHECK(std::abs(s.score(key, "b") - std::log(2.0 / 6.0)) < 1e-12);
  CHECK(std::abs(s.score(key, "c") - std::log(1.0 / 6.0)) < 1e-12);
}

TEST_CASE("refresh raises the refreshed tactic's score and never lowers its rank") {
  RuleFrequencySuggester s;
  s.refresh(seed_pairs());
  std::vector<std::string> goal{"∑ k in Ico 1 (n + 1), f (k - 1) = ∑ l in range n, f l"};
  std::string key = goal_feature_key(goal);
  auto rank_of = [&](const std::string& t) {
    auto c = s.suggest(goal, 100);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i].text == t) return i;
    }
    return c.size();
  };
  double before = s.score(key, "rw [sum_shift]");
  std::size_t rank_before = rank_of("rw [sum_shift]");
  s.refresh(std::vector<StateTacticPair>(100, StateTacticPair{"rw [sum_shift]", "rw", goal, {}}));
  CHECK(s.score(key, "rw [sum_shift]") > before);
  CHECK(rank_of("rw [sum_shift]") <= rank_before);
  CHECK(rank_of("rw [sum_shift]") == 0);

  json snapshot = s.to_json();
  s.refresh({});
  CHECK(s.to_json() == snapshot);
  auto copy = RuleFrequencySuggester::from_json(snapshot);
  CHECK(copy->suggest(goal, 16) == s.suggest(goal, 16));
}

TEST_CASE("rule suggester is deterministic") {
  RuleFrequencySuggester a;
  RuleFrequencySuggester b;
  a.refresh(seed_pairs());
  b.refresh(seed_pairs());
  for (const char* g : {"x + 0 = x", "a + b = b + a", "h : x = y\n⊢ x + 0 = y"}) {
    CHECK(a.suggest({g}, 8) == b.suggest({g}, 8));
    CHECK(a.suggest({g}, 8) == a.suggest({g}, 8));
  }
}

TEST_CASE("prompt format") {
  std::string goal = "n : ℕ\n⊢ Nat.choose (2 * n) n ≤ ∑ x in range n, Nat.choose (2 * n) x + Nat.choose (2 * n) n";
  std::string p = format_prompt({goal});
  CHECK(p.rfind("You are using Lean 4 for theorem proving.", 0) == 0);
  auto at = p.find("[Current State]:");
  REQUIRE(at != std::string::npos);
  CHECK(p.find(goal, at) != std::string::npos);
  CHECK(p.find("[Output Tactic]:") > p.find(goal));
}

TEST_CASE("completion parsing") {
  auto c = parse_completion("rw [sum_range_add], -0.30987493962877327\nrw [two_mul] , −0.6277757014509656\n"
                            "garbage line\nsimp , notanumber\n, -1\nsimp , -1.4107935726642609\n");
  REQUIRE(c.size() == 3);
  CHECK(c[0].text == "rw [sum_range_add]");
  CHECK(c[0].score == doctest::Approx(-0.30987493962877327).epsilon(1e-15));
  CHECK(c[1].text == "rw [two_mul]");
  CHECK(c[1].score == doctest::Approx(-0.6277757014509656).epsilon(1e-15));
  CHECK_THROWS_AS(parse_completion("\n\n  \n"), EmptyCompletion);
  CHECK_THROWS_AS(parse_completion("rw [x]\nsimp"), EmptyCompletion);
}

TEST_CASE("fine-tune export collapses duplicates") {
  std::vector<StateTacticPair> pairs{{"rfl", "n", {"x = x"}, {}}, {"rfl", "n", {"x = x"}, {}},
                                     {"rw [add_zero]", "n", {"x + 0 = x"}, {"x = x"}}};
  auto recs = finetune_records(pairs);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].prompt.find("[Current State]:") != std::string::npos);
  CHECK(recs[0].response == "rfl");
}

TEST_CASE("remote suggester against a local server") {
  httplib::Server server;
  json last_request;
  server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
    last_request = json::parse(req.body);
    json reply{{"completions", {"rw [add_zero] , -0.1", "rfl , -0.5", "rw [add_zero] , -0.9", "no score"}}};
    res.set_content(reply.dump(), "application/json");
  });
  server.Post("/empty", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text": "\n\n"})", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto dir = std::filesystem::temp_directory_path() / "atgforge_remote";
  std::filesystem::create_directories(dir);
  RemoteConfig cfg;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/generate";
  cfg.export_path = dir / "export.jsonl";
  cfg.refresh_hook = "touch '" + (dir / "hook_ran").string() + "' #";
  {
    RemoteSuggester remote(cfg);
    auto c = remote.suggest({"x + 0 = x"}, 8);
    REQUIRE(c.size() == 2);
    CHECK(c[0].text == "rw [add_zero]");
    CHECK(c[0].score == doctest::Approx(-0.1));
    CHECK(last_request.at("n") == 8);
    CHECK(last_request.at("prompt").get<std::string>().find("[Current State]:") != std::string::npos);
    CHECK(last_request.contains("max_tokens"));

    remote.refresh({{"rfl", "n", {"x = x"}, {}}});
    remote.wait_for_refresh();
    CHECK(std::filesystem::exists(dir / "hook_ran"));
    CHECK(read_file(cfg.export_path).find("\"response\":\"rfl\"") != std::string::npos);
  }
  RemoteConfig empty = cfg;
  empty.url = "http://127.0.0.1:" + std::to_string(port) + "/empty";
  CHECK_THROWS_AS(RemoteSuggester(empty).suggest({"x = x"}, 4), EmptyCompletion);

  server.stop();
  th.join();

  RemoteConfig dead = cfg;
  dead.url = "http://127.0.0.1:" + std::to_string(port) + "/generate";
  dead.timeout_secs = 1;
  auto remote = std::make_shared<RemoteSuggester>(dead);
  CHECK_THROWS_AS(remote->suggest({"x = x"}, 4), RemoteUnavailable);
  auto rules = std::make_shared<RuleFrequencySuggester>();
  FallbackSuggester fb(remote, rules);
  CHECK(fb.suggest({"x = x"}, 4).size() == 4);
  std::filesystem::remove_all(dir);
}
