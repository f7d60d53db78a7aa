#include "atgforge/search/search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>

namespace atgforge {

json candidate_path_to_json(const CandidatePath& cp) {
  return json{{"path_id", cp.path_id},
              {"prefix_from_p3", step_texts(cp.prefix_from_p3)},
              {"predicted", step_texts(cp.predicted)},
              {"leaf_goals", cp.leaf_goals},
              {"visits", cp.visits}};
}

CandidatePath candidate_path_from_json(const json& j) {
  CandidatePath cp;
  cp.path_id = j.at("path_id").get<std::string>();
  cp.prefix_from_p3 = make_steps(j.at("prefix_from_p3").get<std::vector<std::string>>());
  cp.predicted = make_steps(j.at("predicted").get<std::vector<std::string>>());
  cp.leaf_goals = j.at("leaf_goals").get<std::vector<std::string>>();
  cp.visits = j.value("visits", 0);
  return cp;
}

double puct_score(const ChildEdge& edge, int sibling_visit_sum, double c_puct) {
  double q = edge.N > 0 ? edge.Q : 0.0;
  return q + c_puct * edge.P * std::sqrt(static_cast<double>(sibling_visit_sum)) / (edge.N + 1);
}

std::map<std::string, ChildEdge>::iterator select(SearchNode& node, double c_puct) {
  int sum = 0;
  for (const auto& [_, e] : node.children) sum += e.N;
  auto best = node.children.end();
  double best_score = 0.0;
  for (auto it = node.children.begin(); it != node.children.end(); ++it) {
    const ChildEdge& e = it->second;
    if (!e.child || e.child->terminal == NodeStatus::failed) continue;
    double s = puct_score(e, sum, c_puct);
    // Map order is lexicographic, so keeping the first of equal (score, P)
    // pairs gives the text tie-break.
    if (best == node.children.end() || s > best_score || (s == best_score && e.P > best->second.P)) {
      best = it;
      best_score = s;
    }
  }
  if (best == node.children.end()) throw NoViableChild("no viable child at depth " + std::to_string(node.depth));
  return best;
}

void backpropagate(const std::vector<ChildEdge*>& path, double value) {
  for (ChildEdge* e : path) {
    e->N += 1;
    e->W += value;
    e->Q = e->W / e->N;
  }
}

double Guidance::value(const std::vector<std::string>& goals) const {
  std::shared_lock lock(mutex_);
  return model_.value(goals);
}

std::vector<double> Guidance::priors(const std::vector<std::string>& goals, std::size_t n) const {
  std::shared_lock lock(mutex_);
  return model_.priors(goal_features(goals), n);
}

void Guidance::train(const std::vector<GuidanceSample>& samples, double learning_rate) {
  std::unique_lock lock(mutex_);
  model_.train(samples, learning_rate);
}

GuidanceModel Guidance::snapshot() const {
  std::shared_lock lock(mutex_);
  return model_;
}

namespace {

bool repeats_ancestor(const SearchNode& node, const std::vector<std::string>& goals) {
  for (const SearchNode* a = &node; a; a = a->parent) {
    if (a->state.goals == goals) return true;
  }
  return false;
}

}  // namespace

int expand(SearchNode& node, const ExpandContext& ctx) {
  node.expanded = true;
  if (node.state.error || node.state.goals.empty()) {
    node.terminal = node.state.error ? NodeStatus::failed : NodeStatus::proved;
    return 0;
  }
  auto candidates = ctx.suggester.suggest(node.state.goals, static_cast<std::size_t>(ctx.limits.max_candidates));
  std::vector<std::string> viable_keys;
  std::vector<double> viable_scores;
  std::vector<int> viable_slots;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& cand = candidates[i];
    ProofState next = ctx.prover.run_tactic(node.state, TacticStep(cand.text));
    auto child = std::make_unique<SearchNode>();
    child->parent = &node;
    child->depth = node.depth + 1;
    child->incoming = cand.text;
    bool sorry = next.has_warning_containing("sorry");
    if (next.error || sorry || (!next.finished && repeats_ancestor(node, next.goals))) {
      child->terminal = NodeStatus::failed;
      child->expanded = true;
      child->pruned = true;
    } else {
      child->terminal = next.finished ? NodeStatus::proved : NodeStatus::open;
      viable_keys.push_back(cand.text);
      viable_scores.push_back(cand.score);
      viable_slots.push_back(static_cast<int>(i));
    }
    child->state = std::move(next);
    ChildEdge edge;
    edge.slot = static_cast<int>(i);
    edge.child = std::move(child);
    node.children[cand.text] = std::move(edge);
  }
  if (viable_keys.empty()) {
    node.terminal = NodeStatus::failed;
    return 0;
  }
  double m = *std::max_element(viable_scores.begin(), viable_scores.end());
  std::vector<double> p(viable_scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += p[i] = std::exp(viable_scores[i] - m);
  for (auto& v : p) v /= z;
  if (ctx.guidance && ctx.limits.blend > 0) {
    std::vector<double> pol = ctx.guidance->priors(node.state.goals, candidates.size());
    double mass = 0.0;
    for (int s : viable_slots) mass += pol[static_cast<std::size_t>(s)];
    for (std::size_t i = 0; i < p.size(); ++i) {
      double learned = mass > 0 ? pol[static_cast<std::size_t>(viable_slots[i])] / mass : 1.0 / p.size();
      p[i] = (1.0 - ctx.limits.blend) * p[i] + ctx.limits.blend * learned;
    }
  }
  for (std::size_t i = 0; i < viable_keys.size(); ++i) node.children[viable_keys[i]].P = p[i];
  return static_cast<int>(viable_keys.size());
}

P3 root_p3(const TheoremRecord& theorem, Prover& prover) {
  return P3{theorem.name + "/root", theorem, {}, prover.get_init_state(theorem)};
}

namespace {

std::vector<std::string> predicted_texts(const SearchNode* leaf) {
  std::vector<std::string> out;
  for (const SearchNode* n = leaf; n && n->parent; n = n->parent) out.push_back(n->incoming);
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

SearchResult run_search(const P3& p3, Suggester& suggester, Prover& prover, const Guidance* guidance,
                        const SearchLimits& limits) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto budget = std::chrono::duration<double>(limits.time_budget_secs);
  SearchResult result;
  ExpandContext ctx{suggester, prover, limits, guidance};

  SearchNode root;
  root.state = p3.tip_state;
  if (root.state.error) root.terminal = NodeStatus::failed;
  auto leaf_value = [&](const SearchNode& n) {
    return guidance ? limits.blend * guidance->value(n.state.goals) : 0.0;
  };

  const SearchNode* proved = nullptr;
  while (result.simulations < limits.simulations_per_decision && root.terminal == NodeStatus::open &&
         clock::now() - start < budget) {
    SearchNode* node = &root;
    std::vector<ChildEdge*> path;
    while (node->expanded && node->terminal == NodeStatus::open) {
      try {
        auto it = select(*node, limits.c_puct);
        path.push_back(&it->second);
        node = it->second.child.get();
      } catch (const NoViableChild&) {
        node->terminal = NodeStatus::failed;
      }
    }
    double value = 0.0;
    if (node->terminal == NodeStatus::failed) {
      value = -1.0;
    } else if (node->terminal == NodeStatus::proved) {
      value = 1.0;
      proved = node;
    } else if (node->depth >= limits.max_depth) {
      value = leaf_value(*node);
    } else {
      expand(*node, ctx);
      for (auto& [_, e] : node->children) {
        if (e.child->terminal == NodeStatus::proved) {
          path.push_back(&e);
          proved = e.child.get();
          break;
        }
      }
      if (proved) {
        value = 1.0;
      } else if (node->terminal == NodeStatus::failed) {
        value = -1.0;
      } else {
        value = leaf_value(*node);
      }
      for (auto& [text, e] : node->children) {
        if (e.child->pruned) continue;
        std::string kind(lean_syntax_name(classify_tactic(text)));
        result.visited_pairs.push_back({text, kind, node->state.goals, e.child->state.goals});
      }
    }
    backpropagate(path, value);
    ++result.simulations;
    if (proved) break;
  }

  if (proved) {
    std::vector<TacticStep> proof = p3.prefix;
    for (const auto& t : predicted_texts(proved)) proof.emplace_back(t);
    result.proofs.push_back(std::move(proof));
    for (const SearchNode* n = proved; n->parent; n = n->parent) {
      result.samples.push_back({goal_features(n->parent->state.goals), 1.0, n->parent->children.at(n->incoming).slot});
    }
  }

  std::vector<CandidatePath> paths;
  std::function<void(const SearchNode&, int)> walk = [&](const SearchNode& n, int visits) {
    bool leaf = std::none_of(n.children.begin(), n.children.end(),
                             [](const auto& kv) { return !kv.second.child->pruned; });
    if (n.parent && leaf && !n.pruned && !n.state.error && n.terminal != NodeStatus::proved) {
      CandidatePath cp;
      cp.prefix_from_p3 = p3.prefix;
      cp.predicted = make_steps(predicted_texts(&n));
      cp.leaf_goals = n.state.goals;
      cp.visits = visits;
      paths.push_back(std::move(cp));
    }
    if (n.expanded && leaf && !n.pruned && !n.state.error) {
      result.samples.push_back({goal_features(n.state.goals), -1.0, std::nullopt});
    }
    for (const auto& [_, e] : n.children) walk(*e.child, e.N);
  };
  walk(root, 0);
  std::stable_sort(paths.begin(), paths.end(), [](const CandidatePath& a, const CandidatePath& b) {
    if (a.visits != b.visits) return a.visits > b.visits;
    return step_texts(a.predicted) < step_texts(b.predicted);
  });
  if (paths.size() > static_cast<std::size_t>(limits.max_candidates)) paths.resize(static_cast<std::size_t>(limits.max_candidates));
  for (std::size_t k = 0; k < paths.size(); ++k) paths[k].path_id = p3.path_id + "/c" + std::to_string(k);
  result.candidate_paths = std::move(paths);
  return result;
}

void train_guidance(Guidance& guidance, const std::vector<P3>& roots, Suggester& suggester, Prover& prover,
                    const SearchLimits& limits) {
  if (roots.empty()) return;
  std::size_t next = 0;
  for (int it = 0; it < limits.train_iterations; ++it) {
    std::vector<GuidanceSample> samples;
    for (int e = 0; e < limits.events_per_iteration; ++e) {
      SearchResult r = run_search(roots[next++ % roots.size()], suggester, prover, &guidance, limits);
      samples.insert(samples.end(), r.samples.begin(), r.samples.end());
    }
    guidance.train(samples, limits.learning_rate);
  }
}

}  // namespace atgforge
