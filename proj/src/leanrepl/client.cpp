#include "atgforge/leanrepl/client.hpp"

#include <cstdlib>

namespace atgforge::lean {

std::chrono::milliseconds default_command_timeout() {
  if (const char* v = std::getenv("ATGFORGE_LEAN_TIMEOUT_SECS")) {
    char* end = nullptr;
    double secs = std::strtod(v, &end);
    if (end != v && secs > 0) return std::chrono::milliseconds(static_cast<long long>(secs * 1000));
  }
  return std::chrono::seconds(60);
}

ReplClient::ReplClient(ReplConfig config) : config_(std::move(config)) {
  std::lock_guard lock(mutex_);
  start_locked();
}

int ReplClient::generation() const {
  std::lock_guard lock(mutex_);
  return generation_;
}

void ReplClient::start_locked() {
  process_ = std::make_unique<ReplProcess>(config_.command);
  env_map_.clear();
  for (const auto& [code, stable] : imports_) {
    json reply = exchange_locked(ReplCommand::command(code), config_.timeout);
    ReplResponse r = response_from_wire(reply);
    if (r.error || !r.env) throw ReplCrashed("import replay failed after restart");
    env_map_[stable] = *r.env;
  }
}

void ReplClient::restart() {
  std::lock_guard lock(mutex_);
  if (process_) process_->kill();
  ++generation_;
  start_locked();
}

json ReplClient::exchange_locked(const ReplCommand& command, std::chrono::milliseconds timeout) {
  process_->send_line(to_json(command).dump());
  std::string text = process_->read_reply(timeout);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("unparseable REPL reply: ") + e.what());
  }
}

json ReplClient::request_locked(const ReplCommand& command, std::chrono::milliseconds timeout) {
  ReplCommand wire = command;
  if (wire.env) {
    auto it = env_map_.find(*wire.env);
    if (it != env_map_.end()) wire.env = it->second;
  }
  try {
    return exchange_locked(wire, timeout);
  } catch (const ReplCrashed& e) {
    restart();
    throw ReplCrashed(std::string(e.what()) + "; REPL restarted");
  } catch (const ReplTimeout&) {
    // The process may still be working on the request; replies would then
    // pair with the wrong command.
    restart();
    throw;
  }
}

json ReplClient::request(const ReplCommand& command, std::optional<std::chrono::milliseconds> timeout) {
  std::lock_guard lock(mutex_);
  return request_locked(command, timeout.value_or(config_.timeout));
}

int ReplClient::run_import(const std::string& code) {
  std::lock_guard lock(mutex_);
  for (const auto& [known, stable] : imports_) {
    if (known == code) return stable;
  }
  ReplResponse r = response_from_wire(request_locked(ReplCommand::command(code), config_.timeout));
  if (r.error || !r.env) {
    std::string why = "import failed";
    for (const auto& m : r.messages) {
      if (m.severity == "error") why += ": " + m.data;
    }
    throw ImportFailed(why, r);
  }
  int stable = *r.env;
  imports_.emplace_back(code, stable);
  env_map_[stable] = *r.env;
  return stable;
}

ReplResponse ReplClient::new_thm(const std::string& code, std::optional<int> env) {
  ReplResponse r = send(ReplCommand::command(code, env));
  for (const auto& s : r.sorries) {
    r.proofstates.push_back(s.proof_state);
    r.goals.insert(r.goals.end(), s.goals.begin(), s.goals.end());
  }
  r.finish = false;
  return r;
}

std::vector<StateTacticPair> ReplClient::run_all_tactics(const std::string& code, std::optional<int> env) {
  ReplCommand c = ReplCommand::command(code, env);
  c.all_tactics = true;
  json reply = request(c);
  if (!reply.contains("tactics")) {
    ReplResponse r = response_from_wire(reply);
    if (r.error) throw ProtocolError("file does not elaborate: " + (r.messages.empty() ? "" : r.messages.front().data));
    return {};
  }
  std::vector<StateTacticPair> pairs;
  try {
    for (const auto& t : reply.at("tactics")) {
      if (t.contains("goalsBefore")) {
        pairs.push_back(pair_from_json(t));
        continue;
      }
      // Plain REPL entries only carry the goals before; the goals after come
      // from re-running the tactic on its recorded proof state.
      StateTacticPair p;
      p.pp = t.at("tactic").get<std::string>();
      p.name = std::string(lean_syntax_name(classify_tactic(p.pp)));
      p.goals_before = split_goals(t.at("goals").get<std::string>());
      ReplResponse after = send(ReplCommand::tactic_on(t.at("proofState").get<int>(), p.pp));
      if (after.error) {
        std::string why = after.messages.empty() ? "tactic failed" : after.messages.front().data;
        p.goals_after = {"<error> " + why};
      } else {
        p.goals_after = after.goals;
      }
      pairs.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed tactics list: ") + e.what());
  }
  return pairs;
}

std::string import_header(const TheoremRecord& theorem, const std::string& fallback) {
  if (theorem.imports.empty()) return fallback;
  std::string out;
  for (const auto& imp : theorem.imports) {
    if (!out.empty()) out += "\n";
    out += imp.rfind("import ", 0) == 0 || imp.rfind("open ", 0) == 0 ? imp : "import " + imp;
  }
  return out;
}

std::string theorem_text(const TheoremRecord& theorem, const std::vector<TacticStep>& proof) {
  std::string out = "theorem " + theorem.name;
  for (const auto& p : theorem.premises) out += " (" + p.name + " : " + p.type_expr + ")";
  out += " : " + theorem.goal + " := by";
  if (proof.empty()) return out + " sorry";
  for (const auto& step : proof) out += "\n  " + step.text();
  return out;
}

LeanProver::LeanProver(std::shared_ptr<ReplClient> client, std::string default_header)
    : client_(std::move(client)), default_header_(std::move(default_header)) {}

std::string LeanProver::session_tag() const { return "lean:" + std::to_string(client_->generation()); }

int LeanProver::env_for(const TheoremRecord& theorem) { return client_->run_import(import_header(theorem, default_header_)); }

namespace {

std::vector<Message> to_messages(const ReplResponse& r) {
  std::vector<Message> out;
  for (const auto& m : r.messages) out.push_back({m.severity, m.data});
  return out;
}

ProofState to_state(const ReplResponse& r, std::string session) {
  ProofState s;
  s.session = std::move(session);
  s.state_ids = r.proofstates;
  s.goals = r.goals;
  s.messages = to_messages(r);
  s.error = r.error;
  s.finished = r.finish;
  return s;
}

}  // namespace

ProofState LeanProver::get_init_state(const TheoremRecord& theorem) {
  try {
    int env = env_for(theorem);
    ReplResponse r = client_->new_thm(theorem_text(theorem, {}), env);
    if (!r.error && r.sorries.size() != 1) {
      return ProofState::make_error(session_tag(), {}, "expected exactly one sorry in the statement");
    }
    if (r.error) {
      r.proofstates.clear();
      r.goals.clear();
    }
    return to_state(r, session_tag());
  } catch (const ImportFailed& e) {
    return ProofState::make_error(session_tag(), {}, e.what());
  } catch (const ReplCrashed& e) {
    return ProofState::make_error(session_tag(), {}, e.what());
  } catch (const ProtocolError& e) {
    return ProofState::make_error(session_tag(), {}, e.what());
  }
}

ProofState LeanProver::run_tactic(const ProofState& state, const TacticStep& tactic) {
  if (state.error) return ProofState::make_error(state.session, state.goals, "cannot run a tactic on an error state");
  if (state.goals.empty()) return ProofState::make_error(state.session, state.goals, "no goals to be proved");
  if (state.session != session_tag() || state.state_ids.empty()) {
    return ProofState::make_error(state.session, state.goals, "proof state invalidated by a REPL restart");
  }
  try {
    ReplResponse r = client_->send(ReplCommand::tactic_on(state.state_ids.front(), tactic.text()));
    if (r.error) return ProofState::make_error(state.session, state.goals, r.messages.empty() ? "tactic failed" : r.messages.front().data);
    return to_state(r, session_tag());
  } catch (const ReplCrashed& e) {
    return ProofState::make_error(state.session, state.goals, e.what());
  } catch (const ProtocolError& e) {
    return ProofState::make_error(state.session, state.goals, e.what());
  }
}

ProofState LeanProver::run_have_tactic(const ProofState& state, const TacticStep& tactic) { return run_tactic(state, tactic); }

VerifyResult LeanProver::is_correct_and_finished(const TheoremRecord& theorem) {
  VerifyResult out;
  int env;
  try {
    env = env_for(theorem);
  } catch (const ImportFailed& e) {
    out.messages.push_back({"error", e.what()});
    return out;
  }
  ReplResponse r;
  try {
    r = client_->send(ReplCommand::command(theorem_text(theorem, theorem.proof), env), check_budget_);
  } catch (const ReplTimeout& e) {
    throw ProverTimeout("proof check of " + theorem.name + " exceeded its budget");
  } catch (const ReplCrashed& e) {
    out.messages.push_back({"error", e.what()});
    return out;
  }
  out.messages = to_messages(r);
  out.correct = !r.error;
  out.finished = r.finish;
  return out;
}

ProverFactory lean_factory(ReplConfig config) {
  return [config] { return std::make_unique<LeanProver>(std::make_shared<ReplClient>(config)); };
}

}  // namespace atgforge::lean
