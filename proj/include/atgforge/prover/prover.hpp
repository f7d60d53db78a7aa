#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"

namespace atgforge {

struct Message {
  std::string severity;  // "error" | "warning" | "info"
  std::string text;
  friend bool operator==(const Message&, const Message&) = default;
};

/// Snapshot of a prover session after a command. Failure is in-band: an
/// inapplicable tactic yields `error = true` with the reason in `messages`.
struct ProofState {
  std::string session;
  std::vector<int> state_ids;
  std::vector<std::string> goals;
  std::vector<Message> messages;
  bool error = false;
  bool finished = false;

  static ProofState make_error(std::string session, std::vector<std::string> goals, std::string message);

  bool has_warning_containing(std::string_view needle) const;
  std::string first_error() const;

  friend bool operator==(const ProofState&, const ProofState&) = default;
};

json state_to_json(const ProofState& state);
ProofState state_from_json(const json& j);

struct VerifyResult {
  bool correct = false;
  bool finished = false;
  std::vector<Message> messages;
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProverTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::chrono::seconds kDefaultCheckBudget{160};

/// The interaction surface shared by every backend.
class Prover {
 public:
  virtual ~Prover() = default;

  virtual std::string backend_name() const = 0;

  /// One goal for a well-formed statement; an error state otherwise.
  virtual ProofState get_init_state(const TheoremRecord& theorem) = 0;

  /// Applies `tactic` to the first goal. Never throws for bad tactics.
  virtual ProofState run_tactic(const ProofState& state, const TacticStep& tactic) = 0;

  virtual ProofState run_have_tactic(const ProofState& state, const TacticStep& tactic) = 0;

  /// Replays the whole proof; throws ProverTimeout past the check budget.
  virtual VerifyResult is_correct_and_finished(const TheoremRecord& theorem) = 0;

  void set_check_budget(std::chrono::milliseconds budget) { check_budget_ = budget; }
  std::chrono::milliseconds check_budget() const { return check_budget_; }

 protected:
  std::chrono::milliseconds check_budget_ = kDefaultCheckBudget;
};

using ProverFactory = std::function<std::unique_ptr<Prover>()>;

/// Replays `proof` from the initial state and returns every state reached,
/// stopping after the first error. Element 0 is the initial state.
std::vector<ProofState> replay(Prover& prover, const TheoremRecord& theorem, const std::vector<TacticStep>& proof);

}  // namespace atgforge
