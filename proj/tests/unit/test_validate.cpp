#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "atgforge/prover/mock_prover.hpp"
#include "atgforge/validate/validate.hpp"
#include "oracles/corpus.hpp"
#include "oracles/enumerator.hpp"

using namespace atgforge;

namespace {

TheoremRecord rec(std::string name, std::string goal, std::vector<std::string> proof, std::vector<Premise> premises = {}) {
  TheoremRecord r;
  r.name = std::move(name);
  r.goal = std::move(goal);
  r.proof = make_steps(proof);
  r.premises = std::move(premises);
  return r;
}

TheoremRecord generated(TheoremRecord r, std::string root, std::size_t steps) {
  r.source = RecordSource::generated;
  r.provenance = Provenance{std::move(root), r.name, steps};
  return r;
}

// Shortest finishing prefix, found by verifying every prefix from scratch.
std::size_t shortest_finishing_prefix(Prover& prover, const TheoremRecord& r) {
  for (std::size_t k = 1; k <= r.proof.size(); ++k) {
    TheoremRecord p = r;
    p.proof.assign(r.proof.begin(), r.proof.begin() + static_cast<std::ptrdiff_t>(k));
    if (prover.is_correct_and_finished(p).finished) return k;
  }
  return 0;
}

std::set<std::string> keys(const std::vector<TheoremRecord>& rs) {
  std::set<std::string> out;
  for (const auto& r : rs) out.insert(dedup_key(r));
  return out;
}

}  // namespace

TEST_CASE("identity simplification") {
  CHECK(simplify_identities("x + 0 = x * 1") == "x = x");
  CHECK(simplify_identities("x + 0 = x·1") == "x = x");
  CHECK(simplify_identities("0 + (a - 0) / 1 = 1 * a") == "a = a");
  CHECK(simplify_identities("x − 0 = x") == "x = x");
  CHECK(simplify_identities("x + 1 = x * 2") == "x + 1 = x * 2");
  CHECK(simplify_identities("f (y * 1) = f y") == "f y = f y");
}

TEST_CASE("dedup examples") {
  auto a = rec("a", "x + y = y + x", {"rw [add_comm]", "rfl"});
  auto b = a;
  auto d = dedup({a, b});
  CHECK(d.unique.size() == 1);
  CHECK(d.duplicates == 1);

  auto c = rec("c", "x + 0 = x·1", {"rfl"});
  auto e = rec("e", "x = x", {"rfl"});
  d = dedup({c, e});
  REQUIRE(d.unique.size() == 1);
  CHECK(d.unique[0].name == "c");

  auto p1 = rec("p1", "x = y", {"assumption"}, {{"h", "x = y"}});
  auto p2 = rec("p2", "x = y", {"assumption"}, {{"h", "y = x"}});
  CHECK(dedup({p1, p2}).unique.size() == 2);
}

TEST_CASE("dedup idempotence on 1000 random records") {
  std::mt19937_64 rng(20241016);
  std::vector<TheoremRecord> records;
  std::uniform_int_distribution<int> pick(0, 4);
  for (int i = 0; i < 1000; ++i) {
    // small terms so collisions (and identity-only variants) actually occur
    std::string lhs = oracle::random_term(rng, 1);
    std::string rhs = oracle::random_term(rng, 1);
    switch (pick(rng)) {
      case 0: lhs = "(" + lhs + ") + 0"; break;
      case 1: rhs = "1 * (" + rhs + ")"; break;
      case 2: lhs = "(" + lhs + ") / 1"; break;
      default: break;
    }
    std::vector<Premise> prem;
    if (pick(rng) == 0) prem.push_back({"h", "x = y"});
    records.push_back(rec("r" + std::to_string(i), lhs + " = " + rhs, {"rfl"}, prem));
  }
  auto once = dedup(records);
  CHECK(once.duplicates > 0);
  CHECK(once.unique.size() + once.duplicates == records.size());
  auto twice = dedup(once.unique);
  CHECK(twice.duplicates == 0);
  CHECK(twice.unique == once.unique);

  auto reversed = records;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(keys(dedup(reversed).unique) == keys(once.unique));
}

TEST_CASE("classification examples") {
  mock::MockProver prover;
  CHECK(classify(rec("r", "x + 0 = x", {"rw [add_zero]", "rfl", "rw [add_zero]"}), prover).verdict ==
        Verdict::RedundantSteps);
  CHECK(classify(rec("i", "x + 0 = x", {"rw [add_zero]"}), prover).verdict == Verdict::Incomplete);
  CHECK(classify(rec("t", "(−1)↑ + 0 = (−1)↑", {"rw [add_zero]", "rfl"}), prover).verdict == Verdict::TypeError);
  CHECK(classify(rec("t2", "2 + -1 = 1", {"rfl"}), prover).verdict == Verdict::TypeError);
  CHECK(classify(rec("ok", "x + 0 = x", {"rw [add_zero]", "rfl"}), prover).verdict == Verdict::Correct);

  auto ground = classify(rec("l", "2 + 2 = 5", {"rfl"}), prover);
  CHECK(ground.verdict == Verdict::LogicalError);
  CHECK(classify(rec("l2", "x = 3", {"assumption"}, {{"h", "x = 2"}}), prover).verdict == Verdict::LogicalError);
  CHECK(classify(rec("l3", "x = y", {"assumption"}, {{"h", "1 + 1 = 3"}}), prover).verdict == Verdict::LogicalError);

  CHECK(classify(rec("u", "x + = 1", {"rfl"}), prover).verdict == Verdict::Unrepairable);
  prover.set_check_budget(std::chrono::milliseconds(-1));
  auto timed = classify(rec("slow", "x + 0 = x", {"rw [add_zero]", "rfl"}), prover);
  CHECK(timed.verdict == Verdict::Unrepairable);
  CHECK_FALSE(timed.messages.empty());
}

TEST_CASE("redundant repair returns the shortest finishing prefix on 50 fixtures") {
  mock::MockProver prover;
  std::mt19937_64 rng(7);
  const auto& alphabet = oracle::tactic_alphabet();
  std::uniform_int_distribution<std::size_t> len(1, 12), junk(1, 3), tac(0, alphabet.size() - 1);
  for (int i = 0; i < 50; ++i) {
    TheoremRecord r = oracle::random_mock_proof(rng, len(rng), "red" + std::to_string(i));
    std::size_t base = r.proof.size();
    std::size_t extra = junk(rng);
    for (std::size_t j = 0; j < extra; ++j) r.proof.emplace_back(alphabet[tac(rng)]);
    std::size_t expect = shortest_finishing_prefix(prover, r);
    REQUIRE(expect == base);
    CHECK(classify(r, prover).verdict == Verdict::RedundantSteps);
    TheoremRecord fixed = repair_redundant(r, prover);
    CHECK(fixed.proof.size() == expect);
    CHECK(std::equal(fixed.proof.begin(), fixed.proof.end(), r.proof.begin()));
    CHECK(classify(fixed, prover).verdict == Verdict::Correct);
  }
}

TEST_CASE("redundant repair small cases") {
  mock::MockProver prover;
  auto fixed = repair_redundant(rec("r", "x + 0 = x", {"rw [add_zero]", "rfl", "simp", "rfl"}), prover);
  CHECK(step_texts(fixed.proof) == std::vector<std::string>{"rw [add_zero]", "rfl"});
  CHECK_THROWS_AS(repair_redundant(rec("i", "x + 0 = x", {"rw [add_zero]"}), prover), RepairFailed);
}

TEST_CASE("ucb1 arithmetic and first-play urgency") {
  double expected = 3.0 / 4.0 + 1.414 * std::sqrt(std::log(10.0) / 4.0);
  CHECK(ucb1_score(3, 4, 10, 1.414) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ucb1_score(3, 4, 10, 1.414) == doctest::Approx(1.823).epsilon(1e-3));

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> n(0, 20);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> visits(6);
    std::vector<double> wins(6);
    int parent = 1;
    for (std::size_t i = 0; i < visits.size(); ++i) {
      visits[i] = n(rng);
      wins[i] = std::uniform_int_distribution<int>(0, visits[i])(rng);
      parent += visits[i];
    }
    std::size_t chosen = ucb1_select(visits, wins, parent, std::sqrt(2.0));
    auto first_zero = std::find(visits.begin(), visits.end(), 0);
    if (first_zero != visits.end()) {
      CHECK(chosen == static_cast<std::size_t>(first_zero - visits.begin()));
    } else {
      for (std::size_t i = 0; i < visits.size(); ++i) {
        CHECK(ucb1_score(wins[chosen], visits[chosen], parent, std::sqrt(2.0)) >=
              ucb1_score(wins[i], visits[i], parent, std::sqrt(2.0)));
      }
    }
  }
  CHECK(ucb1_select({2, 2}, {1, 1}, 4, 1.0) == 0);
  CHECK_THROWS(ucb1_select({}, {}, 1, 1.0));
}

TEST_CASE("single-missing-step fixtures are completed within 100 simulations") {
  mock::MockProver prover;
  RuleFrequencySuggester suggester;
  RepairBudget budget;
  REQUIRE(budget.simulations == 100);
  REQUIRE(budget.candidates == 16);

  std::vector<TheoremRecord> fixtures = oracle::load_fixture("seeds.jsonl");
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) fixtures.push_back(oracle::random_mock_proof(rng, 2 + i % 8, "miss" + std::to_string(i)));

  std::size_t checked = 0;
  for (const auto& full : fixtures) {
    for (std::size_t drop = 0; drop < full.proof.size(); ++drop) {
      TheoremRecord r = full;
      r.proof.erase(r.proof.begin() + static_cast<std::ptrdiff_t>(drop));
      if (prover.is_correct_and_finished(r).finished) continue;
      auto verdict = classify(r, prover).verdict;
      if (verdict != Verdict::Incomplete) continue;
      // Only the dropped-tail case is a pure "open goal" fixture; the oracle
      // confirms the tactic alphabet can close it from the replay point.
      if (drop + 1 != full.proof.size()) continue;
      auto init = prover.get_init_state(r);
      ProofState s = init;
      for (const auto& t : r.proof) s = prover.run_tactic(s, t);
      REQUIRE(oracle::enumerate(prover, s, 1).proof.has_value());
      CAPTURE(r.name);
      TheoremRecord fixed = repair_incomplete(r, prover, suggester, budget);
      CHECK(prover.is_correct_and_finished(fixed).finished);
      CHECK(classify(fixed, prover).verdict == Verdict::Correct);
      ++checked;
    }
  }
  CHECK(checked >= 25);
}

TEST_CASE("incomplete repair drops a failing tail and searches from there") {
  mock::MockProver prover;
  RuleFrequencySuggester suggester;
  auto r = rec("mid", "0 + x * 1 = x", {"rw [zero_add]", "rw [add_zero]", "rfl"});
  CHECK(classify(r, prover).verdict == Verdict::Incomplete);
  auto fixed = repair_incomplete(r, prover, suggester);
  CHECK(fixed.proof.front().text() == "rw [zero_add]");
  CHECK(prover.is_correct_and_finished(fixed).finished);

  RepairBudget tiny;
  tiny.simulations = 1;
  CHECK_THROWS_AS(repair_incomplete(rec("hard", "x + 1 = x", {}), prover, suggester, tiny), RepairFailed);
}

TEST_CASE("type repair restores ascriptions from the root") {
  mock::MockProver prover;
  auto root = rec("root", "2 + (-1 : ℝ) / (m + 1) = 2 + (-1 : ℝ) / (m + 1)", {"rfl"});
  auto cand = generated(rec("cand", "2 + -1 / (m + 1) * 1 = 2 + -1 / (m + 1)", {"rw [mul_one]", "rfl"}), "root", 1);
  CHECK(classify(cand, prover).verdict == Verdict::TypeError);
  auto fixed = repair_type(cand, root, prover);
  CHECK(fixed.goal == "2 + (-1 : ℝ) / (m + 1) * 1 = 2 + (-1 : ℝ) / (m + 1)");
  CHECK(classify(fixed, prover).verdict == Verdict::Correct);

  auto coerced = generated(rec("coe", "(-1)↑ + 0 = (-1)↑", {"rw [add_zero]", "rfl"}), "root", 1);
  auto fixed2 = repair_type(coerced, root, prover);
  CHECK(fixed2.goal == "(-1 : ℝ) + 0 = (-1 : ℝ)");
  CHECK(classify(fixed2, prover).verdict == Verdict::Correct);

  auto plain = rec("plain", "x + 0 = y", {"rfl"});
  CHECK_THROWS_AS(repair_type(plain, root, prover), RepairFailed);
}

TEST_CASE("validate_all routing and counters") {
  RuleFrequencySuggester suggester;
  auto factory = mock::mock_factory();

  auto a = generated(rec("a", "x + 0 = x", {"rw [add_zero]", "rfl"}), "root", 1);
  auto b = a;
  b.name = "b";
  auto c = generated(rec("c", "y * 1 = y", {"rw [mul_one]"}), "root", 2);
  auto report = validate_all({a, b, c}, factory, suggester);
  CHECK(report.stats.n_candidate() == 3);
  CHECK(report.stats.n_deduplicated() == 2);
  CHECK(report.stats.n_correct() == 1);
  CHECK(report.stats.n_corrected() == 1);
  CHECK(report.stats.n_new() == 2);
  REQUIRE(report.dataset.size() == 2);
  CHECK(report.dataset[0].source == RecordSource::generated);
  CHECK(report.dataset[1].source == RecordSource::corrected);
  CHECK(report.stats.histogram(StatsCategory::corrected).at(2) == 1);

  auto l1 = generated(rec("l1", "2 + 2 = 5", {"rfl"}), "root", 1);
  auto l2 = generated(rec("l2", "x = 3", {"assumption"}, {{"h", "x = 2"}}), "root", 1);
  auto bad = validate_all({l1, l2}, factory, suggester);
  CHECK(bad.dataset.empty());
  REQUIRE(bad.rejects.size() == 2);
  CHECK(bad.rejects[0].verdict == Verdict::LogicalError);
  CHECK(reject_to_json(bad.rejects[0])["verdict"] == "LogicalError");
  CHECK(bad.stats.n_new() == 0);
}

TEST_CASE("validate_all is sound, order-stable and keeps the stats identity across worker counts") {
  RuleFrequencySuggester suggester;
  auto factory = mock::mock_factory();
  std::map<std::string, TheoremRecord> roots{{"root", rec("root", "(-1 : ℝ) + 0 = (-1 : ℝ)", {"rw [add_zero]", "rfl"})}};

  std::mt19937_64 rng(99);
  std::vector<TheoremRecord> batch;
  for (int i = 0; i < 40; ++i) {
    TheoremRecord r = oracle::random_mock_proof(rng, 1 + i % 6, "g" + std::to_string(i));
    switch (i % 4) {
      case 1: r.proof.emplace_back("rfl"); break;    // redundant
      case 2: r.proof.pop_back(); break;              // incomplete
      case 3: r.goal = "2 + 2 = 5"; break;            // logical
      default: break;
    }
    batch.push_back(generated(std::move(r), "root", 1 + i % 3));
  }
  batch.push_back(generated(rec("ty", "-1 + 0 = -1", {"rw [add_zero]", "rfl"}), "root", 1));

  ValidateOptions one;
  one.roots = &roots;
  ValidateOptions four = one;
  four.workers = 4;
  auto r1 = validate_all(batch, factory, suggester, one);
  auto r4 = validate_all(batch, factory, suggester, four);
  CHECK(r1.dataset == r4.dataset);
  CHECK(r1.stats == r4.stats);
  CHECK(r1.stats.n_new() == r1.stats.n_correct() + r1.stats.n_corrected());
  CHECK(r1.stats.n_new() == r1.dataset.size());
  CHECK(r1.stats.n_deduplicated() == r1.dataset.size() + r1.rejects.size());

  mock::MockProver prover;
  for (const auto& r : r1.dataset) {
    auto v = prover.is_correct_and_finished(r);
    CHECK(v.correct);
    CHECK(v.finished);
  }
  bool saw_type_fix = false;
  for (const auto& r : r1.dataset) saw_type_fix |= r.name == "ty";
  CHECK(saw_type_fix);
  for (const auto& rj : r1.rejects) CHECK(rj.verdict == Verdict::LogicalError);
}
