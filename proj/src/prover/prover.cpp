#include "atgforge/prover/prover.hpp"

namespace atgforge {

ProofState ProofState::make_error(std::string session, std::vector<std::string> goals, std::string message) {
  ProofState s;
  s.session = std::move(session);
  s.goals = std::move(goals);
  s.messages.push_back({"error", std::move(message)});
  s.error = true;
  return s;
}

bool ProofState::has_warning_containing(std::string_view needle) const {
  for (const auto& m : messages) {
    if (m.severity == "warning" && m.text.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string ProofState::first_error() const {
  for (const auto& m : messages) {
    if (m.severity == "error") return m.text;
  }
  return {};
}

json state_to_json(const ProofState& state) {
  json messages = json::array();
  for (const auto& m : state.messages) messages.push_back(json{{"severity", m.severity}, {"data", m.text}});
  return json{{"session", state.session},   {"proofstates", state.state_ids}, {"goals", state.goals},
              {"messages", messages},        {"error", state.error},         {"finish", state.finished}};
}

ProofState state_from_json(const json& j) {
  ProofState s;
  s.session = j.value("session", std::string());
  s.state_ids = j.at("proofstates").get<std::vector<int>>();
  s.goals = j.at("goals").get<std::vector<std::string>>();
  for (const auto& m : j.value("messages", json::array())) {
    s.messages.push_back({m.at("severity").get<std::string>(), m.at("data").get<std::string>()});
  }
  s.error = j.value("error", false);
  s.finished = j.value("finish", false);
  return s;
}

std::vector<ProofState> replay(Prover& prover, const TheoremRecord& theorem, const std::vector<TacticStep>& proof) {
  std::vector<ProofState> states;
  states.push_back(prover.get_init_state(theorem));
  for (const auto& step : proof) {
    if (states.back().error) break;
    states.push_back(prover.run_tactic(states.back(), step));
  }
  return states;
}

}  // namespace atgforge
