#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"
#include "atgforge/leanrepl/process.hpp"
#include "atgforge/leanrepl/protocol.hpp"
#include "atgforge/prover/prover.hpp"

namespace atgforge::lean {

/// 60 s unless ATGFORGE_LEAN_TIMEOUT_SECS holds a positive number.
std::chrono::milliseconds default_command_timeout();

struct ReplConfig {
  std::vector<std::string> command;  // argv of the REPL executable
  std::chrono::milliseconds timeout = default_command_timeout();
};

class ImportFailed : public std::runtime_error {
 public:
  ImportFailed(const std::string& what, ReplResponse response)
      : std::runtime_error(what), response_(std::move(response)) {}
  const ReplResponse& response() const { return response_; }

 private:
  ReplResponse response_;
};

/// Serialized access to one REPL process. A crash or timeout restarts the
/// process and replays every import; the failing request still throws, and
/// generation() moves on so older proof-state ids can be recognized as stale.
class ReplClient {
 public:
  explicit ReplClient(ReplConfig config);

  /// Raw reply object.
  json request(const ReplCommand& command, std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  ReplResponse send(const ReplCommand& command, std::optional<std::chrono::milliseconds> timeout = std::nullopt) {
    return response_from_wire(request(command, timeout));
  }

  /// Environment id for `code` (stable across restarts). ImportFailed when
  /// the REPL reports an error.
  int run_import(const std::string& code);

  /// Submits a `:= by sorry` statement and reads its initial proof state.
  ReplResponse new_thm(const std::string& code, std::optional<int> env);

  /// Every tactic of a complete file with goals before and after.
  std::vector<StateTacticPair> run_all_tactics(const std::string& code, std::optional<int> env = std::nullopt);

  int generation() const;
  void restart();

 private:
  void start_locked();
  json request_locked(const ReplCommand& command, std::chrono::milliseconds timeout);
  json exchange_locked(const ReplCommand& command, std::chrono::milliseconds timeout);

  ReplConfig config_;
  mutable std::recursive_mutex mutex_;
  std::unique_ptr<ReplProcess> process_;
  int generation_ = 0;
  std::vector<std::pair<std::string, int>> imports_;  // code, stable id
  std::map<int, int> env_map_;                        // stable id -> live id
};

/// Prover over a Lean REPL. Theorems are stated as
/// `theorem name (h : T) ... : goal := by ...` in an environment built from
/// the record's imports (default "import Mathlib\nopen Finset Nat").
class LeanProver final : public Prover {
 public:
  explicit LeanProver(std::shared_ptr<ReplClient> client, std::string default_header = "import Mathlib\nopen Finset Nat");

  std::string backend_name() const override { return "lean"; }
  ProofState get_init_state(const TheoremRecord& theorem) override;
  ProofState run_tactic(const ProofState& state, const TacticStep& tactic) override;
  ProofState run_have_tactic(const ProofState& state, const TacticStep& tactic) override;
  VerifyResult is_correct_and_finished(const TheoremRecord& theorem) override;

  ReplClient& client() { return *client_; }

 private:
  int env_for(const TheoremRecord& theorem);
  std::string session_tag() const;

  std::shared_ptr<ReplClient> client_;
  std::string default_header_;
};

/// Header text for a record: its imports as `import` lines, or the default.
std::string import_header(const TheoremRecord& theorem, const std::string& fallback);

/// `theorem name (p : T) ... : goal := by` followed by the body.
std::string theorem_text(const TheoremRecord& theorem, const std::vector<TacticStep>& proof);

ProverFactory lean_factory(ReplConfig config);

}  // namespace atgforge::lean
