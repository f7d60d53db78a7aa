#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "atgforge/prover/expr.hpp"
#include "atgforge/prover/prover.hpp"
#include "atgforge/prover/rules.hpp"

namespace atgforge::mock {

struct Hypothesis {
  std::string name;
  std::string type_text;
  std::optional<Equation> eq;
};

/// A goal as the mock backend prints it: hypothesis lines `name : type`
/// followed by `⊢ target`, or the bare target when there are no hypotheses.
struct Goal {
  std::vector<Hypothesis> hyps;
  Equation target;

  const Hypothesis* find_hyp(std::string_view name) const;
};

std::string print_goal(const Goal& goal);
Goal parse_goal(std::string_view text);

/// Splits Lean-style goal text into hypothesis lines and the target after `⊢`.
std::string goal_target_text(std::string_view goal_text);

/// Deterministic term-rewriting prover. Stateless: every ProofState carries
/// its goals as text, so identical inputs always give identical outputs.
class MockProver final : public Prover {
 public:
  explicit MockProver(std::shared_ptr<const RuleTable> rules = nullptr);

  std::string backend_name() const override { return "mock"; }
  ProofState get_init_state(const TheoremRecord& theorem) override;
  ProofState run_tactic(const ProofState& state, const TacticStep& tactic) override;
  ProofState run_have_tactic(const ProofState& state, const TacticStep& tactic) override;
  VerifyResult is_correct_and_finished(const TheoremRecord& theorem) override;

  const RuleTable& rules() const { return *rules_; }

 private:
  ProofState make_state(std::vector<std::string> goals, std::vector<Message> messages = {}) const;
  ProofState fail(const ProofState& from, std::string message) const;

  std::shared_ptr<const RuleTable> rules_;
};

ProverFactory mock_factory(std::shared_ptr<const RuleTable> rules = nullptr);

}  // namespace atgforge::mock
