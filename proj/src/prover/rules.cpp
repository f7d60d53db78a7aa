#include "atgforge/prover/rules.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include <json.hpp>

#include "atgforge/core/record.hpp"

namespace atgforge::mock {

namespace {

void pattern_vars(const ExprPtr& e, std::set<std::string>& out) {
  if (is_pattern_var(*e)) out.insert(e->name);
  for (const auto& a : e->args) pattern_vars(a, out);
}

bool has_pattern_vars(const ExprPtr& e) {
  if (is_pattern_var(*e)) return true;
  for (const auto& a : e->args) {
    if (has_pattern_vars(a)) return true;
  }
  return false;
}

std::set<std::string> all_names(const ExprPtr& e) {
  std::set<std::string> out;
  std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
    if (x->op == Op::var || is_sum(x->op)) out.insert(x->name);
    for (const auto& a : x->args) walk(a);
  };
  walk(e);
  return out;
}

std::optional<ExprPtr> mul_sum_forward(const ExprPtr& term) {
  if (term->op != Op::mul || !is_sum(term->args[1]->op)) return std::nullopt;
  const ExprPtr& c = term->args[0];
  const ExprPtr& s = term->args[1];
  std::string binder = s->name;
  ExprPtr body = s->args.back();
  std::set<std::string> c_free = free_vars(c);
  if (c_free.contains(binder)) {
    std::set<std::string> avoid = c_free;
    avoid.merge(all_names(body));
    std::string fresh = fresh_name(binder, avoid);
    body = substitute(body, binder, var(fresh));
    binder = fresh;
  }
  std::vector<ExprPtr> args(s->args.begin(), s->args.end() - 1);
  args.push_back(binary(Op::mul, c, body));
  auto out = std::make_shared<Expr>(*s);
  out->name = binder;
  out->args = std::move(args);
  return out;
}

std::optional<ExprPtr> mul_sum_backward(const ExprPtr& term) {
  if (!is_sum(term->op) || term->args.back()->op != Op::mul) return std::nullopt;
  const ExprPtr& body = term->args.back();
  const ExprPtr& c = body->args[0];
  if (free_vars(c).contains(term->name)) return std::nullopt;
  std::vector<ExprPtr> args(term->args.begin(), term->args.end() - 1);
  args.push_back(body->args[1]);
  return binary(Op::mul, c, with_args(*term, std::move(args)));
}

std::optional<ExprPtr> sum_shift_forward(const ExprPtr& term) {
  if (term->op != Op::sum_ico) return std::nullopt;
  const ExprPtr& lo = term->args[0];
  const ExprPtr& hi = term->args[1];
  ExprPtr body = term->args[2];
  std::string binder = term->name;
  std::set<std::string> lo_free = free_vars(lo);
  if (lo_free.contains(binder)) {
    std::set<std::string> avoid = lo_free;
    avoid.merge(all_names(body));
    std::string fresh = fresh_name(binder, avoid);
    body = substitute(body, binder, var(fresh));
    binder = fresh;
  }
  ExprPtr shifted = substitute(body, binder, binary(Op::add, lo, var(binder)));
  return sum_range(binder, binary(Op::sub, hi, lo), shifted);
}

std::optional<ExprPtr> fold_numerals(const ExprPtr& e) {
  if (!is_binary(e->op) || e->args[0]->op != Op::num || e->args[1]->op != Op::num) return std::nullopt;
  std::uint64_t a = e->args[0]->value, b = e->args[1]->value, out = 0;
  switch (e->op) {
    case Op::add:
      if (__builtin_add_overflow(a, b, &out)) return std::nullopt;
      return num(out);
    case Op::mul:
      if (__builtin_mul_overflow(a, b, &out)) return std::nullopt;
      return num(out);
    case Op::sub: return num(a >= b ? a - b : 0);
    default: return num(b == 0 ? 0 : a / b);
  }
}

using RootRewrite = std::function<std::optional<ExprPtr>(const ExprPtr&)>;

// Pre-order search for the first node where `at_root` fires.
std::optional<ExprPtr> rewrite_first_expr(const ExprPtr& e, const RootRewrite& at_root, std::set<std::string>& bound,
                                          bool respect_binders) {
  bool blocked = false;
  if (respect_binders && !bound.empty()) {
    for (const auto& v : free_vars(e)) {
      if (bound.contains(v)) {
        blocked = true;
        break;
      }
    }
  }
  if (!blocked) {
    if (auto r = at_root(e)) return r;
  }
  for (std::size_t i = 0; i < e->args.size(); ++i) {
    bool binds = is_sum(e->op) && i + 1 == e->args.size();
    bool inserted = binds && bound.insert(e->name).second;
    auto r = rewrite_first_expr(e->args[i], at_root, bound, respect_binders);
    if (inserted) bound.erase(e->name);
    if (r) {
      std::vector<ExprPtr> args = e->args;
      args[i] = *r;
      return with_args(*e, std::move(args));
    }
  }
  return std::nullopt;
}

std::optional<Equation> rewrite_first_eq(const Equation& eq, const RootRewrite& at_root, bool respect_binders) {
  std::set<std::string> bound;
  if (auto l = rewrite_first_expr(eq.lhs, at_root, bound, respect_binders)) return Equation{*l, eq.rhs};
  if (auto r = rewrite_first_expr(eq.rhs, at_root, bound, respect_binders)) return Equation{eq.lhs, *r};
  return std::nullopt;
}

}  // namespace

RewriteRule RewriteRule::pattern(std::string name, std::string_view lhs, std::string_view rhs, RuleDirection direction,
                                 bool simp) {
  RewriteRule r;
  r.name = std::move(name);
  r.lhs = parse_expr(lhs);
  r.rhs = parse_expr(rhs);
  r.direction = direction;
  r.simp = simp;
  std::set<std::string> lv, rv;
  pattern_vars(r.lhs, lv);
  pattern_vars(r.rhs, rv);
  // A left-to-right rule may forget variables (sub_self); one usable in both
  // directions must not, or the reverse rewrite could not be instantiated.
  bool ok = direction == RuleDirection::both ? lv == rv : std::includes(lv.begin(), lv.end(), rv.begin(), rv.end());
  if (!ok) throw std::invalid_argument("rule " + r.name + ": rhs uses pattern variables missing from lhs");
  if (contains_op(r.lhs, Op::sum_range) || contains_op(r.lhs, Op::sum_ico) || contains_op(r.rhs, Op::sum_range) ||
      contains_op(r.rhs, Op::sum_ico)) {
    throw std::invalid_argument("rule " + r.name + ": pattern rules may not contain binders");
  }
  if (is_pattern_var(*r.lhs)) throw std::invalid_argument("rule " + r.name + ": lhs may not be a bare variable");
  return r;
}

RewriteRule RewriteRule::local(std::string name, const Equation& eq) {
  RewriteRule r;
  r.name = std::move(name);
  r.lhs = eq.lhs;
  r.rhs = eq.rhs;
  r.direction = RuleDirection::both;
  return r;
}

RewriteRule RewriteRule::make_builtin(std::string name, BuiltinRule which) {
  RewriteRule r;
  r.name = std::move(name);
  r.builtin = which;
  r.direction = which == BuiltinRule::mul_sum ? RuleDirection::both : RuleDirection::ltr;
  return r;
}

bool match(const ExprPtr& pattern, const ExprPtr& term, Bindings& bindings) {
  if (is_pattern_var(*pattern)) {
    auto it = bindings.find(pattern->name);
    if (it != bindings.end()) return alpha_equal(it->second, term);
    bindings.emplace(pattern->name, term);
    return true;
  }
  if (!has_pattern_vars(pattern)) return alpha_equal(pattern, term);
  if (pattern->op != term->op || pattern->args.size() != term->args.size()) return false;
  if (pattern->op == Op::num && pattern->value != term->value) return false;
  if ((pattern->op == Op::var || pattern->op == Op::app || pattern->op == Op::ascribe) && pattern->name != term->name) {
    return false;
  }
  for (std::size_t i = 0; i < pattern->args.size(); ++i) {
    if (!match(pattern->args[i], term->args[i], bindings)) return false;
  }
  return true;
}

ExprPtr instantiate(const ExprPtr& pattern, const Bindings& bindings) {
  if (is_pattern_var(*pattern)) return bindings.at(pattern->name);
  if (pattern->args.empty()) return pattern;
  std::vector<ExprPtr> args;
  args.reserve(pattern->args.size());
  for (const auto& a : pattern->args) args.push_back(instantiate(a, bindings));
  return with_args(*pattern, std::move(args));
}

std::optional<ExprPtr> rewrite_root(const RewriteRule& rule, const ExprPtr& term, bool reverse) {
  switch (rule.builtin) {
    case BuiltinRule::mul_sum: return reverse ? mul_sum_backward(term) : mul_sum_forward(term);
    case BuiltinRule::sum_shift:
      if (reverse) return std::nullopt;
      return sum_shift_forward(term);
    case BuiltinRule::none: break;
  }
  const ExprPtr& from = reverse ? rule.rhs : rule.lhs;
  const ExprPtr& to = reverse ? rule.lhs : rule.rhs;
  if (is_pattern_var(*from)) return std::nullopt;
  Bindings b;
  if (!match(from, term, b)) return std::nullopt;
  return instantiate(to, b);
}

std::optional<Equation> rewrite_first(const RewriteRule& rule, const Equation& eq, bool reverse, bool respect_binders) {
  return rewrite_first_eq(
      eq, [&](const ExprPtr& t) { return rewrite_root(rule, t, reverse); }, respect_binders);
}

RuleTable RuleTable::standard() {
  RuleTable t;
  using D = RuleDirection;
  t.add(RewriteRule::pattern("add_zero", "?a + 0", "?a", D::ltr, true));
  t.add(RewriteRule::pattern("zero_add", "0 + ?a", "?a", D::ltr, true));
  t.add(RewriteRule::pattern("mul_one", "?a * 1", "?a", D::ltr, true));
  t.add(RewriteRule::pattern("one_mul", "1 * ?a", "?a", D::ltr, true));
  t.add(RewriteRule::pattern("add_comm", "?a + ?b", "?b + ?a", D::both));
  t.add(RewriteRule::pattern("mul_comm", "?a * ?b", "?b * ?a", D::both));
  t.add(RewriteRule::pattern("add_assoc", "?a + ?b + ?c", "?a + (?b + ?c)", D::both));
  t.add(RewriteRule::pattern("mul_assoc", "?a * ?b * ?c", "?a * (?b * ?c)", D::both));
  t.add(RewriteRule::make_builtin("mul_sum", BuiltinRule::mul_sum));
  t.add(RewriteRule::make_builtin("sum_shift", BuiltinRule::sum_shift));
  t.add(RewriteRule::pattern("sub_self", "?a - ?a", "0", D::ltr, true));
  t.add(RewriteRule::pattern("two_mul", "2 * ?a", "?a + ?a", D::ltr));
  // Truncated-subtraction cancellation; part of the simp set so that index
  // shifts such as `n + 1 - 1` and `1 + k - 1` normalize.
  t.add(RewriteRule::pattern("add_tsub_cancel_right", "?a + ?b - ?b", "?a", D::ltr, true));
  t.add(RewriteRule::pattern("add_tsub_cancel_left", "?a + ?b - ?a", "?b", D::ltr, true));
  return t;
}

RuleTable RuleTable::from_json_text(std::string_view text) {
  json arr = json::parse(text);
  if (!arr.is_array()) throw std::invalid_argument("rule table must be a JSON array");
  RuleTable t;
  for (const auto& item : arr) {
    std::string name = item.at("name").get<std::string>();
    if (item.contains("builtin")) {
      std::string b = item.at("builtin").get<std::string>();
      if (b == "mul_sum") {
        t.add(RewriteRule::make_builtin(name, BuiltinRule::mul_sum));
      } else if (b == "sum_shift") {
        t.add(RewriteRule::make_builtin(name, BuiltinRule::sum_shift));
      } else {
        throw std::invalid_argument("unknown builtin rule " + b);
      }
      continue;
    }
    std::string dir = item.value("direction", std::string("ltr"));
    if (dir != "ltr" && dir != "both") throw std::invalid_argument("rule " + name + ": direction must be ltr or both");
    t.add(RewriteRule::pattern(name, item.at("lhs").get<std::string>(), item.at("rhs").get<std::string>(),
                               dir == "both" ? RuleDirection::both : RuleDirection::ltr, item.value("simp", false)));
  }
  return t;
}

RuleTable RuleTable::from_json_file(const std::filesystem::path& path) { return from_json_text(read_file(path)); }

void RuleTable::add(RewriteRule rule) {
  for (auto& r : rules_) {
    if (r.name == rule.name) {
      r = std::move(rule);
      return;
    }
  }
  rules_.push_back(std::move(rule));
}

void RuleTable::extend(const RuleTable& other) {
  for (const auto& r : other.rules_) add(r);
}

const RewriteRule* RuleTable::find(std::string_view name) const {
  for (const auto& r : rules_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

Equation RuleTable::simp_normalize(const Equation& eq, int cap, int* steps_taken) const {
  Equation cur = eq;
  int steps = 0;
  RootRewrite step = [this](const ExprPtr& t) -> std::optional<ExprPtr> {
    if (auto f = fold_numerals(t)) return f;
    for (const auto& r : rules_) {
      if (!r.simp) continue;
      if (auto out = rewrite_root(r, t, false)) return out;
    }
    return std::nullopt;
  };
  while (steps < cap) {
    auto next = rewrite_first_eq(cur, step, false);
    if (!next) break;
    cur = *next;
    ++steps;
  }
  if (steps_taken) *steps_taken = steps;
  return cur;
}

}  // namespace atgforge::mock
