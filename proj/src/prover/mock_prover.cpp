#include "atgforge/prover/mock_prover.hpp"

#include <chrono>

#include "atgforge/core/text.hpp"

namespace atgforge::mock {

namespace {

constexpr std::string_view kTurnstile = "⊢";
constexpr std::string_view kSession = "mock";

int state_id(const std::string& goal_text) { return static_cast<int>(fnv1a(goal_text) & 0x7fffffffULL); }

Hypothesis make_hyp(std::string name, std::string_view type_text) {
  Hypothesis h;
  h.name = std::move(name);
  h.type_text = trim(type_text);
  if (h.type_text.find('=') != std::string::npos) {
    h.eq = parse_equation(h.type_text);
    h.type_text = print(*h.eq);
  }
  return h;
}

// Parsed tactic syntax.
struct RwItem {
  std::string rule;
  bool reverse = false;
};

std::optional<std::string> parse_location(std::string_view rest) {
  std::string r = trim(rest);
  if (r.empty()) return std::string();
  if (!starts_with_word(r, "at")) return std::nullopt;
  std::string hyp = trim(std::string_view(r).substr(2));
  if (hyp.empty() || hyp.find(' ') != std::string::npos) return std::nullopt;
  return hyp;
}

struct HaveSyntax {
  std::string name;
  std::string type_text;
  std::optional<std::string> proof_term;
};

std::optional<HaveSyntax> parse_have(std::string_view text) {
  std::string t = trim(text);
  if (!starts_with_word(t, "have")) return std::nullopt;
  std::string_view rest = std::string_view(t).substr(4);
  std::size_t colon = rest.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  // ":=" directly after the name means the type was omitted.
  if (colon + 1 < rest.size() && rest[colon + 1] == '=') return std::nullopt;
  HaveSyntax h;
  h.name = trim(rest.substr(0, colon));
  if (h.name.empty()) h.name = "this";
  if (h.name.find(' ') != std::string::npos) return std::nullopt;
  std::string_view body = rest.substr(colon + 1);
  std::size_t assign = body.find(":=");
  if (assign != std::string_view::npos) {
    h.proof_term = trim(body.substr(assign + 2));
    body = body.substr(0, assign);
  }
  h.type_text = trim(body);
  if (h.type_text.empty()) return std::nullopt;
  return h;
}

}  // namespace

const Hypothesis* Goal::find_hyp(std::string_view name) const {
  for (auto it = hyps.rbegin(); it != hyps.rend(); ++it) {
    if (it->name == name) return &*it;
  }
  return nullptr;
}

std::string print_goal(const Goal& goal) {
  if (goal.hyps.empty()) return print(goal.target);
  std::string out;
  for (const auto& h : goal.hyps) {
    out += h.name;
    out += " : ";
    out += h.eq ? print(*h.eq) : h.type_text;
    out += '\n';
  }
  out += kTurnstile;
  out += ' ';
  out += print(goal.target);
  return out;
}

Goal parse_goal(std::string_view text) {
  Goal g;
  std::size_t turn = text.find(kTurnstile);
  if (turn == std::string_view::npos) {
    g.target = parse_equation(text);
    return g;
  }
  for (const auto& line : split_lines(text.substr(0, turn))) {
    std::string l = trim(line);
    if (l.empty()) continue;
    std::size_t colon = l.find(" : ");
    if (colon == std::string::npos) throw ParseError("malformed hypothesis line: " + l);
    g.hyps.push_back(make_hyp(trim(std::string_view(l).substr(0, colon)), std::string_view(l).substr(colon + 3)));
  }
  g.target = parse_equation(text.substr(turn + kTurnstile.size()));
  return g;
}

std::string goal_target_text(std::string_view goal_text) {
  std::size_t turn = goal_text.rfind(kTurnstile);
  if (turn == std::string_view::npos) return trim(goal_text);
  return trim(goal_text.substr(turn + kTurnstile.size()));
}

MockProver::MockProver(std::shared_ptr<const RuleTable> rules)
    : rules_(rules ? std::move(rules) : std::make_shared<const RuleTable>(RuleTable::standard())) {}

ProofState MockProver::make_state(std::vector<std::string> goals, std::vector<Message> messages) const {
  ProofState s;
  s.session = std::string(kSession);
  for (const auto& g : goals) s.state_ids.push_back(state_id(g));
  s.goals = std::move(goals);
  s.messages = std::move(messages);
  s.finished = s.goals.empty();
  return s;
}

ProofState MockProver::fail(const ProofState& from, std::string message) const {
  return ProofState::make_error(std::string(kSession), from.goals, std::move(message));
}

ProofState MockProver::get_init_state(const TheoremRecord& theorem) {
  Goal g;
  try {
    for (const auto& p : theorem.premises) {
      Hypothesis h = make_hyp(p.name, p.type_expr);
      if (h.eq) {
        for (const auto& side : {h.eq->lhs, h.eq->rhs}) {
          if (auto err = elaboration_error(side)) {
            return ProofState::make_error(std::string(kSession), {}, "premise " + p.name + ": " + *err);
          }
        }
      }
      g.hyps.push_back(std::move(h));
    }
    g.target = parse_equation(theorem.goal);
  } catch (const ParseError& e) {
    return ProofState::make_error(std::string(kSession), {}, std::string("unexpected token: ") + e.what());
  }
  for (const auto& side : {g.target.lhs, g.target.rhs}) {
    if (auto err = elaboration_error(side)) return ProofState::make_error(std::string(kSession), {}, *err);
  }
  return make_state({print_goal(g)});
}

ProofState MockProver::run_tactic(const ProofState& state, const TacticStep& tactic) {
  if (state.error) return fail(state, "cannot run a tactic on an error state");
  if (state.goals.empty()) return fail(state, "no goals to be proved");
  if (tactic.kind() == TacticKind::have) return run_have_tactic(state, tactic);

  Goal goal;
  try {
    goal = parse_goal(state.goals.front());
  } catch (const ParseError& e) {
    return fail(state, std::string("cannot read goal: ") + e.what());
  }
  std::vector<std::string> rest(state.goals.begin() + 1, state.goals.end());
  auto with_first = [&](std::optional<Goal> replacement, std::vector<Message> msgs = {}) {
    std::vector<std::string> goals;
    if (replacement) goals.push_back(print_goal(*replacement));
    goals.insert(goals.end(), rest.begin(), rest.end());
    return make_state(std::move(goals), std::move(msgs));
  };

  const std::string text = trim(tactic.text());
  std::string_view tv = text;

  if (tactic.kind() == TacticKind::rewrite) {
    std::size_t head = tv.find('[');
    std::size_t close = tv.rfind(']');
    std::string keyword = trim(tv.substr(0, head == std::string_view::npos ? tv.size() : head));
    if (head == std::string_view::npos || close == std::string_view::npos || close < head ||
        (keyword != "rw" && keyword != "rewrite")) {
      return fail(state, "unknown tactic: " + text);
    }
    auto location = parse_location(tv.substr(close + 1));
    if (!location) return fail(state, "unexpected token after rewrite rules: " + text);
    std::vector<RwItem> items;
    std::string_view inner = tv.substr(head + 1, close - head - 1);
    std::size_t start = 0;
    while (start <= inner.size()) {
      std::size_t comma = inner.find(',', start);
      std::string item = trim(inner.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      RwItem ri;
      if (item.rfind("←", 0) == 0) {
        ri.reverse = true;
        item = trim(std::string_view(item).substr(std::string_view("←").size()));
      } else if (item.rfind("<-", 0) == 0) {
        ri.reverse = true;
        item = trim(std::string_view(item).substr(2));
      }
      if (item.empty()) return fail(state, "expected a rewrite rule: " + text);
      ri.rule = item;
      items.push_back(ri);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }

    Hypothesis* target_hyp = nullptr;
    if (!location->empty()) {
      for (auto it = goal.hyps.rbegin(); it != goal.hyps.rend(); ++it) {
        if (it->name == *location) {
          target_hyp = &*it;
          break;
        }
      }
      if (!target_hyp) return fail(state, "unknown hypothesis '" + *location + "'");
      if (!target_hyp->eq) return fail(state, "hypothesis '" + *location + "' is not an equation");
    }
    for (const auto& item : items) {
      RewriteRule rule;
      if (const Hypothesis* h = goal.find_hyp(item.rule); h && h != target_hyp) {
        if (!h->eq) return fail(state, "hypothesis '" + item.rule + "' is not an equation");
        rule = RewriteRule::local(h->name, *h->eq);
      } else if (const RewriteRule* r = rules_->find(item.rule)) {
        rule = *r;
      } else {
        return fail(state, "unknown identifier '" + item.rule + "'");
      }
      if (item.reverse && rule.direction != RuleDirection::both) {
        return fail(state, "rule '" + item.rule + "' cannot be used right-to-left");
      }
      const Equation& subject = target_hyp ? *target_hyp->eq : goal.target;
      auto rewritten = rewrite_first(rule, subject, item.reverse, true);
      if (!rewritten) {
        return fail(state, "tactic 'rewrite' failed, did not find instance of the pattern in the " +
                               std::string(target_hyp ? "hypothesis " + target_hyp->name : "target expression"));
      }
      if (target_hyp) {
        target_hyp->eq = *rewritten;
        target_hyp->type_text = print(*rewritten);
      } else {
        goal.target = *rewritten;
      }
    }
    return with_first(goal);
  }

  if (tactic.kind() == TacticKind::simp) {
    if (!starts_with_word(tv, "simp")) return fail(state, "unsupported simp variant: " + text);
    auto location = parse_location(tv.substr(4));
    if (!location) return fail(state, "unsupported simp arguments: " + text);
    if (location->empty()) {
      if (alpha_equal(goal.target.lhs, goal.target.rhs)) return with_first(std::nullopt);
      int steps = 0;
      Equation normal = rules_->simp_normalize(goal.target, kSimpCap, &steps);
      if (alpha_equal(normal.lhs, normal.rhs)) return with_first(std::nullopt);
      if (steps == 0) return fail(state, "simp made no progress");
      goal.target = normal;
      return with_first(goal);
    }
    for (auto it = goal.hyps.rbegin(); it != goal.hyps.rend(); ++it) {
      if (it->name != *location) continue;
      if (!it->eq) return fail(state, "hypothesis '" + *location + "' is not an equation");
      int steps = 0;
      Equation normal = rules_->simp_normalize(*it->eq, kSimpCap, &steps);
      if (steps == 0) return fail(state, "simp made no progress");
      it->eq = normal;
      it->type_text = print(normal);
      return with_first(goal);
    }
    return fail(state, "unknown hypothesis '" + *location + "'");
  }

  if (tactic.kind() == TacticKind::rfl) {
    if (text != "rfl") return fail(state, "unknown tactic: " + text);
    if (!alpha_equal(goal.target.lhs, goal.target.rhs)) {
      return fail(state, "The rfl tactic failed: the left-hand side " + print(goal.target.lhs) +
                             " is not syntactically equal to the right-hand side " + print(goal.target.rhs));
    }
    return with_first(std::nullopt);
  }

  if (tactic.kind() == TacticKind::assumption) {
    if (text != "assumption") return fail(state, "unknown tactic: " + text);
    for (const auto& h : goal.hyps) {
      if (h.eq && alpha_equal(*h.eq, goal.target)) return with_first(std::nullopt);
    }
    return fail(state, "tactic 'assumption' failed");
  }

  if (text == "sorry") return with_first(std::nullopt, {{"warning", "declaration uses 'sorry'"}});

  return fail(state, "unknown tactic: " + text);
}

ProofState MockProver::run_have_tactic(const ProofState& state, const TacticStep& tactic) {
  if (state.error) return fail(state, "cannot run a tactic on an error state");
  if (state.goals.empty()) return fail(state, "no goals to be proved");
  if (tactic.kind() != TacticKind::have) return fail(state, "expected a have tactic: " + tactic.text());
  auto syntax = parse_have(tactic.text());
  if (!syntax) return fail(state, "malformed have: " + tactic.text());

  Goal goal;
  Hypothesis hyp;
  try {
    goal = parse_goal(state.goals.front());
    hyp = make_hyp(syntax->name, syntax->type_text);
  } catch (const ParseError& e) {
    return fail(state, std::string("malformed have: ") + e.what());
  }
  if (!hyp.eq) return fail(state, "have: only equations are supported");
  for (const auto& side : {hyp.eq->lhs, hyp.eq->rhs}) {
    if (auto err = elaboration_error(side)) return fail(state, *err);
  }

  std::vector<std::string> goals;
  if (syntax->proof_term) {
    const std::string& pt = *syntax->proof_term;
    if (pt != "rfl" && pt != "by rfl") return fail(state, "unsupported have proof term: " + pt);
    if (!alpha_equal(hyp.eq->lhs, hyp.eq->rhs)) return fail(state, "type mismatch: rfl cannot prove " + hyp.type_text);
  } else {
    Goal sub{goal.hyps, *hyp.eq};
    goals.push_back(print_goal(sub));
  }
  goal.hyps.push_back(std::move(hyp));
  goals.push_back(print_goal(goal));
  goals.insert(goals.end(), state.goals.begin() + 1, state.goals.end());
  return make_state(std::move(goals));
}

VerifyResult MockProver::is_correct_and_finished(const TheoremRecord& theorem) {
  auto start = std::chrono::steady_clock::now();
  VerifyResult result;
  ProofState s = get_init_state(theorem);
  result.messages = s.messages;
  if (s.error) return result;
  bool sorry = false;
  for (const auto& step : theorem.proof) {
    if (std::chrono::steady_clock::now() - start > check_budget_) {
      throw ProverTimeout("proof check of " + theorem.name + " exceeded its budget");
    }
    s = run_tactic(s, step);
    result.messages.insert(result.messages.end(), s.messages.begin(), s.messages.end());
    if (s.error) return result;
    sorry = sorry || s.has_warning_containing("sorry");
  }
  result.correct = true;
  result.finished = s.goals.empty() && !sorry;
  return result;
}

ProverFactory mock_factory(std::shared_ptr<const RuleTable> rules) {
  if (!rules) rules = std::make_shared<const RuleTable>(RuleTable::standard());
  return [rules] { return std::make_unique<MockProver>(rules); };
}

}  // namespace atgforge::mock
