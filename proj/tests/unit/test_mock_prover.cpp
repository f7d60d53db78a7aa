#include <doctest.h>

#include <random>

#include "atgforge/prover/mock_prover.hpp"
#include "oracles/corpus.hpp"
#include "oracles/debruijn.hpp"
#include "oracles/enumerator.hpp"

using namespace atgforge;
using namespace atgforge::mock;

namespace {

TheoremRecord thm(std::string goal, std::vector<std::string> proof = {}, std::vector<Premise> premises = {}) {
  TheoremRecord r;
  r.name = "t";
  r.goal = std::move(goal);
  r.proof = make_steps(proof);
  r.premises = std::move(premises);
  return r;
}

ProofState step(Prover& p, const ProofState& s, const std::string& t) { return p.run_tactic(s, TacticStep(t)); }

}  // namespace

TEST_CASE("initial states") {
  MockProver p;
  ProofState s = p.get_init_state(thm("x + 0 = x"));
  CHECK_FALSE(s.error);
  REQUIRE(s.goals.size() == 1);
  CHECK(s.goals[0] == "x + 0 = x");
  CHECK(s.state_ids.size() == 1);

  CHECK(p.get_init_state(thm("(x + 0 = x")).error);
  CHECK(p.get_init_state(thm("x + 0")).error);

  ProofState sm = p.get_init_state(thm("∑ k in Ico 1 (n + 1), n * f (k - 1) = n * ∑ l in range n, f l"));
  CHECK_FALSE(sm.error);
  CHECK(sm.goals.size() == 1);

  ProofState h = p.get_init_state(thm("x = y", {}, {{"h", "y = x"}}));
  CHECK(h.goals[0] == "h : y = x\n⊢ x = y");
}

TEST_CASE("run_tactic basics") {
  MockProver p;
  ProofState s = p.get_init_state(thm("x + 0 = x"));
  ProofState a = step(p, s, "rw [add_zero]");
  REQUIRE_FALSE(a.error);
  CHECK(a.goals == std::vector<std::string>{"x = x"});
  ProofState b = step(p, a, "rfl");
  CHECK(b.finished);
  CHECK(b.goals.empty());
  CHECK_FALSE(b.error);

  ProofState bad = step(p, s, "rw [no_such_rule]");
  CHECK(bad.error);
  CHECK_FALSE(bad.finished);
  CHECK(bad.first_error().find("unknown identifier") != std::string::npos);
  CHECK(step(p, s, "rfl").error);
  CHECK(step(p, s, "linarith").error);
  CHECK(step(p, s, "rw [← add_zero]").error);
}

TEST_CASE("error absorption") {
  MockProver p;
  ProofState err = step(p, p.get_init_state(thm("x + 0 = x")), "rw [mul_one]");
  REQUIRE(err.error);
  for (const auto& t : oracle::tactic_alphabet()) {
    ProofState next = step(p, err, t);
    CHECK(next.error);
    CHECK_FALSE(next.finished);
  }
  CHECK(step(p, err, "sorry").error);
}

TEST_CASE("determinism") {
  MockProver p1;
  MockProver p2;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    TheoremRecord r = oracle::random_mock_proof(rng, 1 + static_cast<std::size_t>(i % 7), "r");
    ProofState a = p1.get_init_state(r);
    ProofState b = p2.get_init_state(r);
    CHECK(a == b);
    for (const auto& t : r.proof) {
      a = p1.run_tactic(a, t);
      b = p2.run_tactic(b, t);
      CHECK(a == b);
      CHECK(p1.run_tactic(a, TacticStep("simp")) == p1.run_tactic(a, TacticStep("simp")));
    }
  }
}

TEST_CASE("have semantics") {
  MockProver p;
  ProofState s = p.get_init_state(thm("y + 0 = y"));
  ProofState h = step(p, s, "have h1 : x = x");
  REQUIRE_FALSE(h.error);
  REQUIRE(h.goals.size() == 2);
  CHECK(h.goals[0] == "x = x");
  CHECK(h.goals[1] == "h1 : x = x\n⊢ y + 0 = y");

  ProofState inline_closed = step(p, s, "have h : x = x := rfl");
  REQUIRE_FALSE(inline_closed.error);
  CHECK(inline_closed.goals == std::vector<std::string>{"h : x = x\n⊢ y + 0 = y"});

  CHECK(p.run_have_tactic(s, TacticStep("have :=")).error);
  CHECK(step(p, s, "have h : x = y := rfl").error);

  ProofState use = step(p, h, "rfl");
  REQUIRE_FALSE(use.error);
  CHECK(use.goals.size() == 1);
}

TEST_CASE("rewriting and simp at hypotheses") {
  MockProver p;
  ProofState s = p.get_init_state(thm("x = y", {}, {{"h", "x + 0 = y"}}));
  ProofState a = step(p, s, "rw [add_zero] at h");
  REQUIRE_FALSE(a.error);
  CHECK(a.goals[0] == "h : x = y\n⊢ x = y");
  CHECK(step(p, a, "assumption").finished);
  ProofState b = step(p, s, "simp at h");
  REQUIRE_FALSE(b.error);
  CHECK(step(p, b, "assumption").finished);
  CHECK(step(p, s, "rw [add_zero] at nope").error);
  CHECK(step(p, s, "assumption").error);
  ProofState viah = step(p, p.get_init_state(thm("x + 0 = z", {}, {{"h", "x + 0 = y"}})), "rw [h]");
  REQUIRE_FALSE(viah.error);
  CHECK(goal_target_text(viah.goals[0]) == "y = z");
}

TEST_CASE("is_correct_and_finished") {
  MockProver p;
  VerifyResult ok = p.is_correct_and_finished(thm("x + 0 = x", {"rw [add_zero]", "rfl"}));
  CHECK(ok.correct);
  CHECK(ok.finished);

  VerifyResult sorry = p.is_correct_and_finished(thm("x + 0 = x", {"sorry"}));
  CHECK(sorry.correct);
  CHECK_FALSE(sorry.finished);
  bool warned = false;
  for (const auto& m : sorry.messages) warned = warned || (m.severity == "warning" && m.text == "declaration uses 'sorry'");
  CHECK(warned);

  VerifyResult unknown = p.is_correct_and_finished(thm("x + 0 = x", {"rw [frobnicate]", "rfl"}));
  CHECK_FALSE(unknown.correct);
  CHECK_FALSE(unknown.finished);
  CHECK_FALSE(unknown.messages.empty());

  VerifyResult open = p.is_correct_and_finished(thm("x + 0 = x", {"rw [add_zero]"}));
  CHECK(open.correct);
  CHECK_FALSE(open.finished);

  p.set_check_budget(std::chrono::milliseconds(-1));
  CHECK_THROWS_AS(p.is_correct_and_finished(thm("x + 0 = x", {"rw [add_zero]", "rfl"})), ProverTimeout);
}

TEST_CASE("the sum running example replays in three steps") {
  MockProver p;
  TheoremRecord r = thm("∑ k in Ico 1 (n + 1), n * f (k - 1) = n * ∑ l in range n, f l",
                        {"rw [mul_sum]", "rw [sum_shift]", "simp"});
  auto states = replay(p, r, r.proof);
  REQUIRE(states.size() == 4);
  for (const auto& s : states) CHECK_FALSE(s.error);
  CHECK(states.back().finished);
}

TEST_CASE("soundness: finished states come from structurally equal sides") {
  MockProver p;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 40; ++i) {
    TheoremRecord r = oracle::random_mock_proof(rng, 2 + static_cast<std::size_t>(i % 9), "s");
    auto states = replay(p, r, r.proof);
    REQUIRE(states.back().finished);
    // The state before the closing rfl must have alpha-equal sides according
    // to the independent de Bruijn rendering.
    const ProofState& before = states[states.size() - 2];
    Equation eq = parse_equation(goal_target_text(before.goals[0]));
    CHECK(oracle::structurally_equal(eq.lhs, eq.rhs));
  }
}

TEST_CASE("completeness at small depth against the enumerator") {
  MockProver p;
  for (const auto& r : oracle::load_fixture("corpus20.jsonl")) {
    auto found = oracle::enumerate(p, r, 5);
    if (!found.proof) continue;
    TheoremRecord replayed = r;
    replayed.proof = make_steps(*found.proof);
    auto v = p.is_correct_and_finished(replayed);
    CHECK_MESSAGE(v.finished, r.name);
    CHECK(found.proof->size() <= 5);
  }
}
