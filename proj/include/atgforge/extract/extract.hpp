#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"
#include "atgforge/prover/prover.hpp"

namespace atgforge {

enum class TreeTerminal { no_goals, error, open };

std::string_view to_string(TreeTerminal t);

struct TreeLayer {
  ProofState state;
  std::optional<TacticStep> incoming;
};

/// A replayed proof. The root layer has no incoming tactic; a fully proven
/// n-tactic proof has n + 1 layers.
struct ProofTree {
  TheoremRecord root;
  std::vector<TreeLayer> layers;
  TreeTerminal terminal = TreeTerminal::open;

  std::size_t tactic_count() const { return layers.empty() ? 0 : layers.size() - 1; }
};

class SeedReplayFailed : public std::runtime_error {
 public:
  SeedReplayFailed(std::string theorem, std::size_t step_index, std::string message);
  const std::string& theorem() const { return theorem_; }
  /// 1-based index of the failing tactic; 0 when the statement itself failed.
  std::size_t step_index() const { return step_; }
  const std::string& message() const { return message_; }

 private:
  std::string theorem_;
  std::size_t step_;
  std::string message_;
};

/// Replays every tactic, recording each state. Stops at the first error with
/// terminal = error; the error state is kept as the last layer.
ProofTree build_proof_tree(const TheoremRecord& theorem, Prover& prover);

/// Like build_proof_tree, but a seed that does not end in no goals raises
/// SeedReplayFailed.
ProofTree build_seed_tree(const TheoremRecord& theorem, Prover& prover);

struct P3 {
  std::string path_id;
  TheoremRecord root;
  std::vector<TacticStep> prefix;
  ProofState tip_state;

  friend bool operator==(const P3&, const P3&) = default;
};

/// Every strict, nonempty prefix of a proven tree: n - 1 paths for n tactics.
std::vector<P3> extract_p3s(const ProofTree& tree);

/// One pair per applied tactic that did not error.
std::vector<StateTacticPair> extract_state_tactic_pairs(const ProofTree& tree);

json p3_to_json(const P3& p3);
P3 p3_from_json(const json& j);

std::vector<P3> read_p3s(const std::filesystem::path& path);
void write_p3s(const std::filesystem::path& path, const std::vector<P3>& p3s);

struct Extraction {
  std::vector<P3> p3s;
  std::vector<StateTacticPair> pairs;
  std::vector<std::string> skipped;  // seeds whose replay failed
};

/// Builds trees for all seeds, skipping (and logging) those that fail replay.
Extraction extract_all(const std::vector<TheoremRecord>& seeds, Prover& prover);

}  // namespace atgforge
