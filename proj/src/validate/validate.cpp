#include "atgforge/validate/validate.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <set>


#include "atgforge/core/pool.hpp"
#include "atgforge/core/text.hpp"
#include "atgforge/prover/expr.hpp"
#include "atgforge/prover/mock_prover.hpp"

namespace atgforge {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct: return "Correct";
    case Verdict::Incomplete: return "Incomplete";
    case Verdict::TypeError: return "TypeError";
    case Verdict::LogicalError: return "LogicalError";
    case Verdict::RedundantSteps: return "RedundantSteps";
    case Verdict::Unrepairable: return "Unrepairable";
  }
  return "Unrepairable";
}

namespace {

using mock::Expr;
using mock::ExprPtr;
using mock::Op;

bool is_lit(const ExprPtr& e, std::uint64_t v) { return e->op == Op::num && e->value == v; }

ExprPtr erase_identities(const ExprPtr& e) {
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  for (const auto& a : e->args) args.push_back(erase_identities(a));
  ExprPtr out = args.empty() ? e : mock::with_args(*e, args);
  switch (out->op) {
    case Op::add:
      if (is_lit(args[1], 0)) return args[0];
      if (is_lit(args[0], 0)) return args[1];
      break;
    case Op::sub:
      if (is_lit(args[1], 0)) return args[0];
      break;
    case Op::mul:
      if (is_lit(args[1], 1)) return args[0];
      if (is_lit(args[0], 1)) return args[1];
      break;
    case Op::div:
      if (is_lit(args[1], 1)) return args[0];
      break;
    default: break;
  }
  return out;
}

}  // namespace

std::string simplify_identities(std::string_view statement) {
  try {
    mock::Equation eq = mock::parse_equation(statement);
    return mock::print(mock::Equation{erase_identities(eq.lhs), erase_identities(eq.rhs)});
  } catch (const mock::ParseError&) {
    return normalize_text(statement);
  }
}

std::string dedup_key(const TheoremRecord& record) {
  std::string key = simplify_identities(record.goal);
  for (const auto& p : record.premises) key += "\x1f" + normalize_text(p.name) + ":" + simplify_identities(p.type_expr);
  return key;
}

DedupResult dedup(const std::vector<TheoremRecord>& records) {
  DedupResult out;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(dedup_key(r)).second) {
      out.unique.push_back(r);
    } else {
      ++out.duplicates;
    }
  }
  return out;
}

namespace {

struct Replay {
  std::vector<ProofState> states;  // states[0] is the initial state
  bool timed_out = false;
};

Replay replay_with_budget(const TheoremRecord& record, Prover& prover) {
  auto start = std::chrono::steady_clock::now();
  Replay r;
  r.states.push_back(prover.get_init_state(record));
  for (const auto& step : record.proof) {
    if (r.states.back().error) break;
    if (std::chrono::steady_clock::now() - start > prover.check_budget()) {
      r.timed_out = true;
      break;
    }
    r.states.push_back(prover.run_tactic(r.states.back(), step));
  }
  return r;
}

bool closed(const ProofState& s) { return !s.error && s.goals.empty() && !s.has_warning_containing("sorry"); }

bool type_message(const std::string& m) {
  return m.find("metavariable") != std::string::npos || m.find("failed to synthesize") != std::string::npos ||
         m.find("typeclass instance problem") != std::string::npos;
}

bool ground_false(const mock::Equation& eq) {
  auto l = mock::evaluate_ground(eq.lhs);
  auto r = mock::evaluate_ground(eq.rhs);
  return l && r && *l != *r;
}

// A goal is refuted when its target is a false closed equation, a hypothesis
// is, or a hypothesis pins the same left side to a different closed value.
std::optional<std::string> refutation(const std::string& goal_text) {
  mock::Goal g;
  try {
    g = mock::parse_goal(goal_text);
  } catch (const mock::ParseError&) {
    return std::nullopt;
  }
  if (ground_false(g.target)) return "goal " + mock::print(g.target) + " is false on closed terms";
  for (const auto& h : g.hyps) {
    if (!h.eq) continue;
    if (ground_false(*h.eq)) return "hypothesis " + h.name + " is false on closed terms";
    if (mock::alpha_equal(h.eq->lhs, g.target.lhs)) {
      auto a = mock::evaluate_ground(h.eq->rhs);
      auto b = mock::evaluate_ground(g.target.rhs);
      if (a && b && *a != *b) return "goal contradicts hypothesis " + h.name;
    }
  }
  return std::nullopt;
}

}  // namespace

ValidationOutcome classify(const TheoremRecord& record, Prover& prover) {
  ValidationOutcome out;
  Replay r;
  try {
    r = replay_with_budget(record, prover);
  } catch (const ProverTimeout& e) {
    out.messages.push_back(e.what());
    return out;
  }
  if (r.timed_out) {
    out.messages.push_back("proof check exceeded its budget");
    return out;
  }
  for (const auto& s : r.states) {
    for (const auto& m : s.messages) out.messages.push_back(m.severity + ": " + m.text);
  }
  const ProofState& init = r.states.front();
  if (init.error) {
    std::string m = init.first_error();
    if (type_message(m) || record.goal.find("↑") != std::string::npos) {
      out.verdict = Verdict::TypeError;
    } else {
      out.verdict = Verdict::Unrepairable;
    }
    return out;
  }
  const ProofState& last = r.states.back();
  if (r.states.size() == record.proof.size() + 1 && closed(last)) {
    out.verdict = Verdict::Correct;
    return out;
  }
  for (std::size_t k = 0; k + 1 < r.states.size(); ++k) {
    if (closed(r.states[k])) {
      out.verdict = Verdict::RedundantSteps;
      return out;
    }
  }
  if (last.error && type_message(last.first_error())) {
    out.verdict = Verdict::TypeError;
    return out;
  }
  const ProofState& open = last.error ? r.states[r.states.size() - 2] : last;
  for (const auto* s : {&init, &open}) {
    for (const auto& g : s->goals) {
      if (auto why = refutation(g)) {
        out.messages.push_back(*why);
        out.verdict = Verdict::LogicalError;
        return out;
      }
    }
  }
  out.verdict = Verdict::Incomplete;
  return out;
}

TheoremRecord repair_redundant(const TheoremRecord& record, Prover& prover) {
  Replay r = replay_with_budget(record, prover);
  for (std::size_t k = 1; k < r.states.size(); ++k) {
    if (closed(r.states[k])) {
      TheoremRecord out = record;
      out.proof.erase(out.proof.begin() + static_cast<std::ptrdiff_t>(k), out.proof.end());
      if (!prover.is_correct_and_finished(out).finished) throw RepairFailed("truncated proof does not verify");
      return out;
    }
  }
  throw RepairFailed("no prefix of " + record.name + " closes the goal");
}

namespace {

void collect_ascriptions(const ExprPtr& e, std::map<std::string, std::string>& by_text, std::set<std::string>& types) {
  if (e->op == Op::ascribe) {
    types.insert(e->name);
    by_text[mock::print(e->args[0])] = e->name;
  }
  for (const auto& a : e->args) collect_ascriptions(a, by_text, types);
}

ExprPtr annotate(const ExprPtr& e, bool inside, const std::map<std::string, std::string>& by_text,
                 const std::optional<std::string>& only_type, bool& changed) {
  if (e->op == Op::ascribe) inside = true;
  if (!inside && (e->op == Op::coe || e->op == Op::neg)) {
    ExprPtr inner = e->op == Op::coe ? e->args[0] : e;
    auto it = by_text.find(mock::print(inner));
    std::optional<std::string> type = it != by_text.end() ? std::optional(it->second) : only_type;
    if (type) {
      changed = true;
      return mock::unary(Op::ascribe, inner, *type);
    }
  }
  std::vector<ExprPtr> args;
  for (const auto& a : e->args) args.push_back(annotate(a, inside, by_text, only_type, changed));
  return args.empty() ? e : mock::with_args(*e, args);
}

std::string annotate_statement(const std::string& text, const std::map<std::string, std::string>& by_text,
                               const std::optional<std::string>& only_type, bool& changed) {
  mock::Equation eq = mock::parse_equation(text);
  eq.lhs = annotate(eq.lhs, false, by_text, only_type, changed);
  eq.rhs = annotate(eq.rhs, false, by_text, only_type, changed);
  return mock::print(eq);
}

}  // namespace

TheoremRecord repair_type(const TheoremRecord& record, const TheoremRecord& root, Prover& prover) {
  std::map<std::string, std::string> by_text;
  std::set<std::string> types;
  try {
    auto add = [&](const std::string& s) {
      mock::Equation eq = mock::parse_equation(s);
      collect_ascriptions(eq.lhs, by_text, types);
      collect_ascriptions(eq.rhs, by_text, types);
    };
    add(root.goal);
    for (const auto& p : root.premises) {
      if (p.type_expr.find('=') != std::string::npos) add(p.type_expr);
    }
  } catch (const mock::ParseError& e) {
    throw RepairFailed(std::string("cannot read root statement: ") + e.what());
  }
  std::optional<std::string> only_type = types.size() == 1 ? std::optional(*types.begin()) : std::nullopt;

  TheoremRecord out = record;
  bool changed = false;
  try {
    out.goal = annotate_statement(record.goal, by_text, only_type, changed);
    for (auto& p : out.premises) {
      if (p.type_expr.find('=') != std::string::npos) p.type_expr = annotate_statement(p.type_expr, by_text, only_type, changed);
    }
  } catch (const mock::ParseError& e) {
    throw RepairFailed(std::string("cannot read candidate statement: ") + e.what());
  }
  if (!changed) throw RepairFailed("no untyped literal to annotate in " + record.name);
  if (prover.get_init_state(out).error) throw RepairFailed("annotated statement still fails to elaborate");
  return out;
}

double ucb1_score(double w, int n, int parent_n, double c) {
  return w / n + c * std::sqrt(std::log(static_cast<double>(parent_n)) / n);
}

std::size_t ucb1_select(const std::vector<int>& visits, const std::vector<double>& wins, int parent_visits, double c) {
  if (visits.empty()) throw std::invalid_argument("ucb1_select needs at least one child");
  for (std::size_t i = 0; i < visits.size(); ++i) {
    if (visits[i] == 0) return i;
  }
  std::size_t best = 0;
  double best_score = ucb1_score(wins[0], visits[0], parent_visits, c);
  for (std::size_t i = 1; i < visits.size(); ++i) {
    double s = ucb1_score(wins[i], visits[i], parent_visits, c);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

namespace {

struct RepairNode {
  ProofState state;
  std::string tactic;
  std::vector<std::unique_ptr<RepairNode>> children;
  RepairNode* parent = nullptr;
  int depth = 0;
  int visits = 0;
  double wins = 0.0;
  bool expanded = false;
  bool dead = false;  // expanded with nothing to try
};

}  // namespace

TheoremRecord repair_incomplete(const TheoremRecord& record, Prover& prover, Suggester& suggester,
                                const RepairBudget& budget) {
  Replay r = replay_with_budget(record, prover);
  if (r.states.front().error) throw RepairFailed("statement does not elaborate");
  std::size_t good = r.states.back().error ? r.states.size() - 2 : r.states.size() - 1;
  TheoremRecord base = record;
  base.proof.erase(base.proof.begin() + static_cast<std::ptrdiff_t>(good), base.proof.end());
  const ProofState& start = r.states[good];
  if (closed(start)) return base;

  RepairNode root;
  root.state = start;
  std::set<std::vector<std::string>> seen{start.goals};
  const RepairNode* solved = nullptr;
  for (int sim = 0; sim < budget.simulations && !solved && !root.dead; ++sim) {
    RepairNode* node = &root;
    std::vector<RepairNode*> path{node};
    while (node->expanded && !node->dead) {
      std::vector<int> visits;
      std::vector<double> wins;
      std::vector<RepairNode*> live;
      for (auto& c : node->children) {
        if (c->dead) continue;
        live.push_back(c.get());
        visits.push_back(c->visits);
        wins.push_back(c->wins);
      }
      if (live.empty()) {
        node->dead = true;
        break;
      }
      node = live[ucb1_select(visits, wins, std::max(node->visits, 1), budget.exploration)];
      path.push_back(node);
    }
    double reward = 0.0;
    if (!node->expanded && !node->dead) {
      node->expanded = true;
      if (node->depth < budget.max_depth) {
        for (const auto& cand : suggester.suggest(node->state.goals, static_cast<std::size_t>(budget.candidates))) {
          ProofState next = prover.run_tactic(node->state, TacticStep(cand.text));
          if (next.error || next.has_warning_containing("sorry")) continue;
          auto child = std::make_unique<RepairNode>();
          child->state = std::move(next);
          child->tactic = cand.text;
          child->parent = node;
          child->depth = node->depth + 1;
          if (closed(child->state)) {
            solved = child.get();
            node->children.push_back(std::move(child));
            break;
          }
          if (!seen.insert(child->state.goals).second) continue;
          node->children.push_back(std::move(child));
        }
      }
      if (solved) {
        reward = 1.0;
        path.push_back(const_cast<RepairNode*>(solved));
      } else if (node->children.empty()) {
        node->dead = true;
      }
    }
    for (RepairNode* n : path) {
      n->visits += 1;
      n->wins += reward;
    }
  }
  if (!solved) throw RepairFailed("no completion of " + record.name + " within " + std::to_string(budget.simulations) + " simulations");
  std::vector<std::string> suffix;
  for (const RepairNode* n = solved; n->parent; n = n->parent) suffix.push_back(n->tactic);
  TheoremRecord out = base;
  for (auto it = suffix.rbegin(); it != suffix.rend(); ++it) out.proof.emplace_back(*it);
  if (!prover.is_correct_and_finished(out).finished) throw RepairFailed("completed proof does not verify");
  return out;
}

json reject_to_json(const Reject& r) {
  return json{{"record", record_to_json(r.record)}, {"verdict", std::string(to_string(r.verdict))}, {"messages", r.messages}};
}

namespace {

std::size_t steps_of(const TheoremRecord& r) { return r.provenance ? r.provenance->prediction_steps : 0; }

struct Routed {
  std::optional<TheoremRecord> accepted;
  bool corrected = false;
  Verdict verdict = Verdict::Unrepairable;
  std::vector<std::string> messages;
};

Routed route(const TheoremRecord& record, Prover& prover, Suggester& suggester, const ValidateOptions& options) {
  Routed out;
  ValidationOutcome first = classify(record, prover);
  out.verdict = first.verdict;
  out.messages = first.messages;
  TheoremRecord current = record;
  try {
    // A type repair may expose a second, structural problem, so re-classify.
    for (int round = 0; round < 3; ++round) {
      ValidationOutcome o = round == 0 ? first : classify(current, prover);
      switch (o.verdict) {
        case Verdict::Correct:
          if (!prover.is_correct_and_finished(current).finished) throw RepairFailed("accepted record does not verify");
          out.accepted = current;
          out.corrected = round > 0;
          return out;
        case Verdict::RedundantSteps: current = repair_redundant(current, prover); break;
        case Verdict::Incomplete: current = repair_incomplete(current, prover, suggester, options.budget); break;
        case Verdict::TypeError: {
          if (!options.roots || !current.provenance) throw RepairFailed("no root statement available for type repair");
          auto it = options.roots->find(current.provenance->root_name);
          if (it == options.roots->end()) throw RepairFailed("unknown root " + current.provenance->root_name);
          current = repair_type(current, it->second, prover);
          break;
        }
        case Verdict::LogicalError:
        case Verdict::Unrepairable:
          out.verdict = o.verdict;
          if (round > 0) out.messages.insert(out.messages.end(), o.messages.begin(), o.messages.end());
          return out;
      }
    }
    out.messages.push_back("repair did not converge");
  } catch (const RepairFailed& e) {
    out.messages.push_back(std::string("repair failed: ") + e.what());
  } catch (const ProverTimeout& e) {
    out.messages.push_back(e.what());
  }
  return out;
}

}  // namespace

ValidationReport validate_all(const std::vector<TheoremRecord>& records, const ProverFactory& prover_factory,
                              Suggester& suggester, const ValidateOptions& options) {
  ValidationReport report;
  report.stats.add_candidates(records.size());
  DedupResult d = dedup(records);
  for (const auto& r : d.unique) report.stats.add_deduplicated(steps_of(r));

  std::size_t workers = std::max<std::size_t>(1, options.workers);
  std::vector<std::unique_ptr<Prover>> provers;
  for (std::size_t w = 0; w < std::min(workers, std::max<std::size_t>(1, d.unique.size())); ++w) {
    provers.push_back(prover_factory());
  }
  std::vector<Routed> routed(d.unique.size());
  parallel_for(d.unique.size(), provers.size(), [&](std::size_t w, std::size_t i) {
    routed[i] = route(d.unique[i], *provers[w], suggester, options);
  });

  for (std::size_t i = 0; i < routed.size(); ++i) {
    Routed& r = routed[i];
    if (r.accepted) {
      TheoremRecord rec = std::move(*r.accepted);
      std::size_t steps = steps_of(rec);
      if (r.corrected) {
        if (rec.source == RecordSource::generated) rec.source = RecordSource::corrected;
        report.stats.add_corrected(steps);
      } else {
        report.stats.add_correct(steps);
      }
      report.dataset.push_back(std::move(rec));
    } else {
      report.rejects.push_back({d.unique[i], r.verdict, std::move(r.messages)});
    }
  }
  return report;
}

}  // namespace atgforge
