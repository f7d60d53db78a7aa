#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace atgforge::lean {

using json = nlohmann::json;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Pos {
  int line = 0;
  int column = 0;
  friend bool operator==(const Pos&, const Pos&) = default;
};

struct ReplMessage {
  std::string severity;
  Pos pos;
  std::optional<Pos> end_pos;  // the REPL sends null for zero-width spans
  std::string data;
  friend bool operator==(const ReplMessage&, const ReplMessage&) = default;
};

struct Sorry {
  int proof_state = 0;
  Pos pos;
  std::vector<std::string> goals;
  std::optional<Pos> end_pos;
  friend bool operator==(const Sorry&, const Sorry&) = default;
};

/// Either a command (`cmd`, optionally in `env`) or a tactic on a proof state.
struct ReplCommand {
  std::optional<std::string> cmd;
  std::optional<int> env;
  std::optional<int> proof_state;
  std::optional<std::string> tactic;
  bool all_tactics = false;

  static ReplCommand command(std::string code, std::optional<int> env = std::nullopt);
  static ReplCommand tactic_on(int proof_state, std::string tactic);

  /// Throws ProtocolError unless exactly one request form is populated.
  void validate() const;
  friend bool operator==(const ReplCommand&, const ReplCommand&) = default;
};

/// Keys: cmd, env, proofState, tactic, allTactics.
json to_json(const ReplCommand& c);
ReplCommand command_from_json(const json& j);

/// The tactic-state view: env, proofstates, goals, messages, sorries, error,
/// finish.
struct ReplResponse {
  std::optional<int> env;
  std::vector<int> proofstates;
  std::vector<std::string> goals;
  std::vector<ReplMessage> messages;
  std::vector<Sorry> sorries;
  bool error = false;
  bool finish = false;
  friend bool operator==(const ReplResponse&, const ReplResponse&) = default;
};

json to_json(const ReplResponse& r);
/// Strict: unknown keys or wrong types raise ProtocolError.
ReplResponse response_from_json(const json& j);

/// Converts a raw REPL reply (proofState, sorries[].goal, top-level
/// `message` errors, ...) into the tactic-state view.
ReplResponse response_from_wire(const json& raw);

/// Splits a pretty-printed goal block ("g1\n\ng2") into single goals.
std::vector<std::string> split_goals(const std::string& block);

}  // namespace atgforge::lean
