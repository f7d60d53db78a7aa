#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atgforge/prover/expr.hpp"

namespace atgforge::mock {

enum class RuleDirection { ltr, both };

/// Rules whose effect needs binder manipulation and so cannot be written as
/// first-order patterns.
enum class BuiltinRule { none, mul_sum, sum_shift };

struct RewriteRule {
  std::string name;
  ExprPtr lhs;
  ExprPtr rhs;
  RuleDirection direction = RuleDirection::ltr;
  bool simp = false;
  BuiltinRule builtin = BuiltinRule::none;

  /// Pattern rule over `?`-prefixed pattern variables; throws
  /// std::invalid_argument when lhs and rhs disagree on their variables.
  static RewriteRule pattern(std::string name, std::string_view lhs, std::string_view rhs,
                             RuleDirection direction = RuleDirection::ltr, bool simp = false);
  static RewriteRule local(std::string name, const Equation& eq);
  static RewriteRule make_builtin(std::string name, BuiltinRule which);
};

using Bindings = std::map<std::string, ExprPtr>;

bool match(const ExprPtr& pattern, const ExprPtr& term, Bindings& bindings);
ExprPtr instantiate(const ExprPtr& pattern, const Bindings& bindings);

/// Rewrites `term` at its root with `rule`, or returns nullopt.
std::optional<ExprPtr> rewrite_root(const RewriteRule& rule, const ExprPtr& term, bool reverse = false);

/// Rewrites the first redex in leftmost-outermost order. When
/// `respect_binders` is set, subterms that mention a sum-bound variable are
/// skipped, the way `rw` cannot abstract over bound variables.
std::optional<Equation> rewrite_first(const RewriteRule& rule, const Equation& eq, bool reverse, bool respect_binders);

class RuleTable {
 public:
  /// The default table: add_zero, zero_add, mul_one, one_mul, add_comm,
  /// mul_comm, add_assoc, mul_assoc, mul_sum, sum_shift, sub_self, two_mul,
  /// plus the simp lemmas add_tsub_cancel_right and add_tsub_cancel_left.
  static RuleTable standard();

  /// JSON array of {name, lhs, rhs, direction?, simp?} or {name, builtin}.
  static RuleTable from_json_file(const std::filesystem::path& path);
  static RuleTable from_json_text(std::string_view text);

  void add(RewriteRule rule);
  void extend(const RuleTable& other);

  const RewriteRule* find(std::string_view name) const;
  const std::vector<RewriteRule>& rules() const { return rules_; }

  /// Exhaustive directed rewriting with the simp-flagged rules plus numeral
  /// folding, at most `cap` steps.
  Equation simp_normalize(const Equation& eq, int cap, int* steps_taken = nullptr) const;

 private:
  std::vector<RewriteRule> rules_;
};

inline constexpr int kSimpCap = 100;

}  // namespace atgforge::mock
