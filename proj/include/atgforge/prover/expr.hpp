#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace atgforge::mock {

// Term language of the mock backend: natural-number arithmetic with unary
// function application, type ascription, coercion markers and bounded sums.
enum class Op { num, var, add, sub, mul, div, neg, app, coe, ascribe, sum_range, sum_ico };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  Op op = Op::num;
  std::uint64_t value = 0;
  // var: variable name; app: function name; ascribe: type name; sums: binder.
  std::string name;
  // binary: {lhs, rhs}; neg/coe/ascribe/app: {operand};
  // sum_range: {bound, body}; sum_ico: {lo, hi, body}.
  std::vector<ExprPtr> args;
};

ExprPtr num(std::uint64_t v);
ExprPtr var(std::string name);
ExprPtr binary(Op op, ExprPtr lhs, ExprPtr rhs);
ExprPtr unary(Op op, ExprPtr operand, std::string name = {});
ExprPtr sum_range(std::string binder, ExprPtr bound, ExprPtr body);
ExprPtr sum_ico(std::string binder, ExprPtr lo, ExprPtr hi, ExprPtr body);
ExprPtr with_args(const Expr& e, std::vector<ExprPtr> args);

bool is_binary(Op op);
bool is_sum(Op op);
bool is_pattern_var(const Expr& e);

struct Equation {
  ExprPtr lhs;
  ExprPtr rhs;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExprPtr parse_expr(std::string_view text);
Equation parse_equation(std::string_view text);

std::string print(const ExprPtr& e);
std::string print(const Equation& eq);

/// Equality up to renaming of sum binders.
bool alpha_equal(const ExprPtr& a, const ExprPtr& b);
bool alpha_equal(const Equation& a, const Equation& b);

std::set<std::string> free_vars(const ExprPtr& e);
bool contains_op(const ExprPtr& e, Op op);

/// Capture-avoiding substitution of `replacement` for free occurrences of `name`.
ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& replacement);

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

/// Value of a closed term under truncated subtraction and floor division;
/// nullopt for open terms, function applications, overflow, or sums too large
/// to unfold.
std::optional<std::uint64_t> evaluate_ground(const ExprPtr& e);

/// Message of the first elaboration problem (uncoerced negation or bare
/// coercion marker outside an ascription), if any.
std::optional<std::string> elaboration_error(const ExprPtr& e);

}  // namespace atgforge::mock
