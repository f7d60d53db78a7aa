#include <doctest.h>

#include "atgforge/prover/expr.hpp"
#include "atgforge/prover/rules.hpp"
#include "oracles/debruijn.hpp"

using namespace atgforge::mock;
namespace oracle = atgforge::oracle;

TEST_CASE("parse and print round trip") {
  for (const char* s : {"x + 0", "x + y * z", "(x + y) * z", "x - (y - z)", "x - y - z", "f x + 1", "f (x + 1)",
                        "∑ k in range n, f k", "n * ∑ l in range n, f l", "∑ k in Ico 1 (n + 1), n * f (k - 1)",
                        "∑ k in range n, k + 1", "∑ k in range n, (k + 1)", "2 + (-1 : ℝ) / (m + 1)", "x↑ + 1", "(x + 1)↑", "x / 1"}) {
    ExprPtr e = parse_expr(s);
    CHECK(print(e) == s);
    CHECK(oracle::structurally_equal(parse_expr(print(e)), e));
  }
}

TEST_CASE("parser accepts alternative notation") {
  CHECK(print(parse_expr("x · 1")) == "x * 1");
  CHECK(print(parse_expr("x × y")) == "x * y");
  CHECK(print(parse_expr("∑ k ∈ Finset.range n, k")) == "∑ k in range n, k");
  CHECK(print(parse_expr("↑x")) == "x↑");
  CHECK(print(parse_expr("(−1 : ℝ)")) == "(-1 : ℝ)");
  CHECK(print(parse_expr("∑ k in range n, k + 1")) == print(parse_expr("(∑ k in range n, k) + 1")));
  CHECK(print(parse_expr("x−y")) == "x - y");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_expr("(x + 1"), ParseError);
  CHECK_THROWS_AS(parse_expr("x +"), ParseError);
  CHECK_THROWS_AS(parse_equation("x + 1"), ParseError);
  CHECK_THROWS_AS(parse_equation("x = = y"), ParseError);
}

TEST_CASE("alpha equivalence agrees with the de Bruijn oracle") {
  const char* terms[] = {"∑ k in range n, f k", "∑ l in range n, f l", "∑ k in range n, f n", "∑ n in range n, f n",
                         "∑ k in Ico 1 n, k * k", "∑ j in Ico 1 n, j * j", "∑ j in Ico 1 n, j * k", "x + y"};
  for (const char* a : terms) {
    for (const char* b : terms) {
      ExprPtr ea = parse_expr(a);
      ExprPtr eb = parse_expr(b);
      CHECK_MESSAGE(alpha_equal(ea, eb) == oracle::structurally_equal(ea, eb), a, " vs ", b);
    }
  }
}

TEST_CASE("substitution avoids capture") {
  ExprPtr e = parse_expr("∑ k in range n, k * m");
  ExprPtr out = substitute(e, "m", parse_expr("k + 1"));
  CHECK(oracle::structurally_equal(out, parse_expr("∑ k_1 in range n, k_1 * (k + 1)")));
  CHECK(free_vars(out) == std::set<std::string>{"k", "n"});
}

TEST_CASE("ground evaluation uses natural-number semantics") {
  CHECK(evaluate_ground(parse_expr("2 + 3 * 4")) == 14u);
  CHECK(evaluate_ground(parse_expr("3 - 5")) == 0u);
  CHECK(evaluate_ground(parse_expr("7 / 2")) == 3u);
  CHECK(evaluate_ground(parse_expr("7 / 0")) == 0u);
  CHECK(evaluate_ground(parse_expr("∑ k in range 4, k")) == 6u);
  CHECK(evaluate_ground(parse_expr("∑ k in Ico 2 5, k * k")) == 29u);
  CHECK_FALSE(evaluate_ground(parse_expr("x + 1")));
  CHECK_FALSE(evaluate_ground(parse_expr("f 1")));
}

TEST_CASE("elaboration errors") {
  CHECK(elaboration_error(parse_expr("2 + −1")));
  CHECK(elaboration_error(parse_expr("(−1)↑ + 2")));
  CHECK_FALSE(elaboration_error(parse_expr("2 + (−1 : ℝ)")));
  CHECK_FALSE(elaboration_error(parse_expr("x + 1")));
}

TEST_CASE("rewriting is leftmost-outermost and single occurrence") {
  RuleTable t = RuleTable::standard();
  const RewriteRule* add_zero = t.find("add_zero");
  REQUIRE(add_zero);
  auto r = rewrite_first(*add_zero, parse_equation("(x + 0) + 0 = y + 0"), false, true);
  REQUIRE(r);
  CHECK(print(*r) == "x + 0 = y + 0");

  const RewriteRule* add_comm = t.find("add_comm");
  auto c = rewrite_first(*add_comm, parse_equation("a + b = c + d"), false, true);
  REQUIRE(c);
  CHECK(print(*c) == "b + a = c + d");
  CHECK_FALSE(rewrite_first(*add_zero, parse_equation("x = y"), false, true));
}

TEST_CASE("rw cannot rewrite under binders but simp can") {
  RuleTable t = RuleTable::standard();
  Equation eq = parse_equation("∑ k in range n, (k + 0) = 0");
  CHECK_FALSE(rewrite_first(*t.find("add_zero"), eq, false, true));
  Equation s = t.simp_normalize(eq, kSimpCap);
  CHECK(print(s) == "∑ k in range n, k = 0");
}

TEST_CASE("builtin sum rules") {
  RuleTable t = RuleTable::standard();
  auto m = rewrite_first(*t.find("mul_sum"), parse_equation("n * ∑ l in range n, f l = 0"), false, true);
  REQUIRE(m);
  CHECK(print(*m) == "∑ l in range n, n * f l = 0");
  auto m2 = rewrite_first(*t.find("mul_sum"), parse_equation("k * ∑ k in range n, f k = 0"), false, true);
  REQUIRE(m2);
  CHECK(oracle::structurally_equal(m2->lhs, parse_expr("∑ j in range n, k * f j")));
  auto back = rewrite_first(*t.find("mul_sum"), *m, true, true);
  REQUIRE(back);
  CHECK(print(*back) == "n * ∑ l in range n, f l = 0");

  auto sh = rewrite_first(*t.find("sum_shift"), parse_equation("∑ k in Ico 1 (n + 1), f (k - 1) = 0"), false, true);
  REQUIRE(sh);
  CHECK(print(*sh) == "∑ k in range (n + 1 - 1), f (1 + k - 1) = 0");
  Equation simp = t.simp_normalize(*sh, kSimpCap);
  CHECK(print(simp) == "∑ k in range n, f k = 0");
}

TEST_CASE("simp folds numerals and terminates") {
  RuleTable t = RuleTable::standard();
  CHECK(print(t.simp_normalize(parse_equation("2 + 3 = x * 1"), kSimpCap)) == "5 = x");
  CHECK(print(t.simp_normalize(parse_equation("x - x + 0 = y"), kSimpCap)) == "0 = y");
  int steps = 0;
  t.simp_normalize(parse_equation("x = y"), kSimpCap, &steps);
  CHECK(steps == 0);
}

TEST_CASE("rule tables load from JSON") {
  RuleTable t = RuleTable::from_json_text(R"([
    {"name": "double", "lhs": "?a + ?a", "rhs": "2 * ?a", "direction": "ltr"},
    {"name": "shift2", "builtin": "sum_shift"}
  ])");
  REQUIRE(t.find("double"));
  REQUIRE(t.find("shift2"));
  CHECK(t.find("shift2")->builtin == BuiltinRule::sum_shift);
  CHECK_THROWS(RuleTable::from_json_text(R"([{"name": "bad", "lhs": "?a", "rhs": "?a + ?b"}])"));
  CHECK_THROWS(RuleTable::from_json_text(R"([{"name": "bad", "builtin": "nope"}])"));
}
