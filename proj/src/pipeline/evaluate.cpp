#include "atgforge/pipeline/evaluate.hpp"

#include <chrono>
#include <queue>
#include <set>

namespace atgforge {

json EvalReport::to_json() const {
  json rs = json::array();
  for (const auto& r : results) {
    rs.push_back(json{{"name", r.name}, {"proved", r.proved}, {"proof", r.proof}, {"expansions", r.expansions},
                      {"timed_out", r.timed_out}});
  }
  return json{{"pass@1", rate}, {"width", width}, {"wall_time_secs", wall_time_secs}, {"results", rs}};
}

namespace {

struct Frontier {
  double score;
  std::size_t order;
  ProofState state;
  std::vector<std::string> proof;
};

struct Worse {
  bool operator()(const Frontier& a, const Frontier& b) const {
    if (a.score != b.score) return a.score < b.score;
    return a.order > b.order;
  }
};

}  // namespace

EvalResult prove_best_first(const TheoremRecord& theorem, Prover& prover, Suggester& suggester,
                            const EvalSettings& settings) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto budget = std::chrono::duration<double>(settings.wall_time_secs);
  EvalResult out;
  out.name = theorem.name;
  auto out_of_time = [&] { return clock::now() - start >= budget; };
  if (out_of_time()) {
    out.timed_out = true;
    return out;
  }

  ProofState init = prover.get_init_state(theorem);
  if (init.error) return out;
  std::priority_queue<Frontier, std::vector<Frontier>, Worse> queue;
  std::set<std::vector<std::string>> seen{init.goals};
  std::size_t order = 0;
  queue.push({0.0, order++, init, {}});

  while (!queue.empty()) {
    if (out_of_time()) {
      out.timed_out = true;
      return out;
    }
    if (out.expansions >= settings.max_expansions) return out;
    Frontier node = queue.top();
    queue.pop();
    ++out.expansions;
    if (static_cast<int>(node.proof.size()) >= settings.max_depth) continue;
    for (const auto& cand : suggester.suggest(node.state.goals, settings.width)) {
      ProofState next = prover.run_tactic(node.state, TacticStep(cand.text));
      if (next.error || next.has_warning_containing("sorry")) continue;
      std::vector<std::string> proof = node.proof;
      proof.push_back(cand.text);
      if (next.goals.empty()) {
        out.proved = true;
        out.proof = std::move(proof);
        return out;
      }
      if (!seen.insert(next.goals).second) continue;
      queue.push({node.score + cand.score, order++, std::move(next), std::move(proof)});
    }
  }
  return out;
}

EvalReport evaluate_pass1(const std::vector<TheoremRecord>& testset, Prover& prover, Suggester& suggester,
                          const EvalSettings& settings) {
  EvalReport report;
  report.width = settings.width;
  report.wall_time_secs = settings.wall_time_secs;
  std::size_t proved = 0;
  for (const auto& t : testset) {
    EvalResult r;
    try {
      r = prove_best_first(t, prover, suggester, settings);
    } catch (const ProverTimeout&) {
      r.name = t.name;
      r.timed_out = true;
    }
    proved += r.proved ? 1 : 0;
    report.results.push_back(std::move(r));
  }
  report.rate = testset.empty() ? 0.0 : static_cast<double>(proved) / static_cast<double>(testset.size());
  return report;
}

}  // namespace atgforge
