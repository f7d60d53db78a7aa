#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include "atgforge/core/text.hpp"
#include "atgforge/extract/extract.hpp"
#include "atgforge/prover/mock_prover.hpp"
#include "oracles/corpus.hpp"

using namespace atgforge;

namespace {

TheoremRecord seed(const std::string& name) {
  for (const auto& r : oracle::load_fixture("seeds.jsonl")) {
    if (r.name == name) return r;
  }
  throw std::runtime_error("missing fixture " + name);
}

}  // namespace

TEST_CASE("running example gives a four-layer tree and two P3s") {
  mock::MockProver p;
  ProofTree tree = build_seed_tree(seed("sum_mul_congr"), p);
  CHECK(tree.layers.size() == 4);
  CHECK(tree.terminal == TreeTerminal::no_goals);
  CHECK_FALSE(tree.layers[0].incoming);
  auto p3s = extract_p3s(tree);
  REQUIRE(p3s.size() == 2);
  CHECK(p3s[0].prefix.size() == 1);
  CHECK(p3s[1].prefix.size() == 2);
  CHECK(p3s[0].path_id != p3s[1].path_id);
  auto pairs = extract_state_tactic_pairs(tree);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].pp == "rw [mul_sum]");
  CHECK(pairs[0].name == "Lean.Parser.Tactic.rwSeq");
  CHECK(pairs[2].goals_after.empty());
}

TEST_CASE("23-tactic seed gives 24 layers and 22 P3s") {
  mock::MockProver p;
  TheoremRecord r = seed("idt_23");
  REQUIRE(r.proof.size() == 23);
  ProofTree tree = build_seed_tree(r, p);
  CHECK(tree.layers.size() == 24);
  CHECK(extract_p3s(tree).size() == 22);
}

TEST_CASE("one-tactic proof has no P3s") {
  mock::MockProver p;
  ProofTree tree = build_seed_tree(seed("refl_only"), p);
  CHECK(tree.layers.size() == 2);
  CHECK(extract_p3s(tree).empty());
}

TEST_CASE("errors stop the tree") {
  mock::MockProver p;
  TheoremRecord r;
  r.name = "bad";
  r.goal = "x + 0 = x";
  r.proof = make_steps({"rw [add_zero]", "rw [nonexistent]", "rfl"});
  ProofTree tree = build_proof_tree(r, p);
  CHECK(tree.terminal == TreeTerminal::error);
  CHECK(tree.layers.size() == 3);
  CHECK(tree.layers[2].state.error);
  CHECK(extract_p3s(tree).empty());
  auto pairs = extract_state_tactic_pairs(tree);
  CHECK(pairs.size() == 1);
  try {
    build_seed_tree(r, p);
    FAIL("expected SeedReplayFailed");
  } catch (const SeedReplayFailed& e) {
    CHECK(e.step_index() == 2);
    CHECK(e.message().find("nonexistent") != std::string::npos);
  }
  r.proof = make_steps({"rw [add_zero]"});
  CHECK(build_proof_tree(r, p).terminal == TreeTerminal::open);
  CHECK_THROWS_AS(build_seed_tree(r, p), SeedReplayFailed);
  r.proof = make_steps({"sorry"});
  CHECK_THROWS_AS(build_seed_tree(r, p), SeedReplayFailed);
}

TEST_CASE("mock two-step proof pairs") {
  mock::MockProver p;
  ProofTree tree = build_seed_tree(seed("add_zero_rfl"), p);
  auto pairs = extract_state_tactic_pairs(tree);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].goals_before == std::vector<std::string>{"x + 0 = x"});
  CHECK(pairs[1].goals_after.empty());
}

TEST_CASE("P3 count law, prefix property and replay fidelity on random proofs") {
  mock::MockProver p;
  std::mt19937_64 rng(17);
  for (std::size_t len = 1; len <= 23; ++len) {
    TheoremRecord r = oracle::random_mock_proof(rng, len, "rand" + std::to_string(len));
    ProofTree tree = build_seed_tree(r, p);
    auto p3s = extract_p3s(tree);
    CHECK(p3s.size() == len - 1);
    std::set<std::vector<std::string>> distinct;
    for (const auto& p3 : p3s) {
      CHECK(p3.prefix.size() < r.proof.size());
      CHECK(std::equal(p3.prefix.begin(), p3.prefix.end(), r.proof.begin()));
      distinct.insert(step_texts(p3.prefix));
      auto states = replay(p, r, p3.prefix);
      REQUIRE(states.size() == p3.prefix.size() + 1);
      REQUIRE(states.back().goals.size() == p3.tip_state.goals.size());
      for (std::size_t g = 0; g < p3.tip_state.goals.size(); ++g) {
        CHECK(normalize_text(states.back().goals[g]) == normalize_text(p3.tip_state.goals[g]));
      }
    }
    CHECK(distinct.size() == p3s.size());
  }
}

TEST_CASE("P3 serialization round trip and extract_all skipping") {
  mock::MockProver p;
  auto seeds = oracle::load_fixture("seeds.jsonl");
  TheoremRecord broken;
  broken.name = "broken";
  broken.goal = "x = y";
  broken.proof = make_steps({"rfl"});
  seeds.push_back(broken);
  Extraction ex = extract_all(seeds, p);
  CHECK(ex.skipped == std::vector<std::string>{"broken"});
  std::size_t expected = 0;
  for (std::size_t i = 0; i + 1 < seeds.size(); ++i) expected += seeds[i].proof.size() - 1;
  CHECK(ex.p3s.size() == expected);

  auto path = std::filesystem::temp_directory_path() / "atgforge_p3s.jsonl";
  write_p3s(path, ex.p3s);
  CHECK(read_p3s(path) == ex.p3s);
  std::filesystem::remove(path);
}
