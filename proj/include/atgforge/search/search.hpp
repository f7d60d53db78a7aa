#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "atgforge/extract/extract.hpp"
#include "atgforge/prover/prover.hpp"
#include "atgforge/search/guidance.hpp"
#include "atgforge/suggest/suggest.hpp"

namespace atgforge {

enum class NodeStatus { open, proved, failed };

struct SearchNode;

struct ChildEdge {
  int N = 0;
  double W = 0.0;
  double Q = 0.0;
  double P = 0.0;
  int slot = -1;  // rank of the tactic in the suggester's list
  std::unique_ptr<SearchNode> child;
};

struct SearchNode {
  ProofState state;
  std::map<std::string, ChildEdge> children;  // keyed by tactic text
  NodeStatus terminal = NodeStatus::open;
  int depth = 0;
  bool expanded = false;
  bool pruned = false;  // an error, a repeated state, or a sorry-closed goal
  SearchNode* parent = nullptr;
  std::string incoming;  // tactic text on the edge from the parent
};

struct SearchLimits {
  double c_puct = 1.0;
  int simulations_per_decision = 100;
  int max_candidates = 16;
  double time_budget_secs = 300.0;
  int events_per_iteration = 20;
  int train_iterations = 10;
  int max_depth = 20;
  double blend = 0.5;
  double learning_rate = 1e-2;
};

struct CandidatePath {
  std::string path_id;
  std::vector<TacticStep> prefix_from_p3;
  std::vector<TacticStep> predicted;
  std::vector<std::string> leaf_goals;
  int visits = 0;

  friend bool operator==(const CandidatePath&, const CandidatePath&) = default;
};

json candidate_path_to_json(const CandidatePath& cp);
CandidatePath candidate_path_from_json(const json& j);

struct SearchResult {
  std::vector<std::vector<TacticStep>> proofs;  // full proofs from the root theorem
  std::vector<CandidatePath> candidate_paths;
  std::vector<StateTacticPair> visited_pairs;
  std::vector<GuidanceSample> samples;
  int simulations = 0;
};

class NoViableChild : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double puct_score(const ChildEdge& edge, int sibling_visit_sum, double c_puct);

/// Argmax of puct_score over children that have not failed; ties go to the
/// higher prior, then the lexicographically smaller tactic.
std::map<std::string, ChildEdge>::iterator select(SearchNode& node, double c_puct);

/// Adds N += 1, W += value, Q = W / N on every edge.
void backpropagate(const std::vector<ChildEdge*>& path, double value);

/// Shared, optionally trained guidance. Inference takes a shared lock and
/// training an exclusive one.
class Guidance {
 public:
  explicit Guidance(GuidanceModel model = GuidanceModel()) : model_(std::move(model)) {}
  double value(const std::vector<std::string>& goals) const;
  std::vector<double> priors(const std::vector<std::string>& goals, std::size_t n) const;
  void train(const std::vector<GuidanceSample>& samples, double learning_rate);
  GuidanceModel snapshot() const;

 private:
  mutable std::shared_mutex mutex_;
  GuidanceModel model_;
};

struct ExpandContext {
  Suggester& suggester;
  Prover& prover;
  const SearchLimits& limits;
  const Guidance* guidance = nullptr;
};

/// Queries the suggester and runs each candidate. Viable children get
/// priors from the suggester softmax (blended with the policy when guidance
/// is present); errors and states that repeat an ancestor's goals become
/// failed edges with prior 0. Returns the number of viable children.
int expand(SearchNode& node, const ExpandContext& ctx);

SearchResult run_search(const P3& p3, Suggester& suggester, Prover& prover, const Guidance* guidance,
                        const SearchLimits& limits);

/// The search root for a statement with no replayed prefix.
P3 root_p3(const TheoremRecord& theorem, Prover& prover);

/// Runs limits.train_iterations rounds of limits.events_per_iteration
/// searches over `roots` (cycled), training the guidance after each round.
void train_guidance(Guidance& guidance, const std::vector<P3>& roots, Suggester& suggester, Prover& prover,
                    const SearchLimits& limits);

}  // namespace atgforge
