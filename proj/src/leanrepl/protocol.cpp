#include "atgforge/leanrepl/protocol.hpp"

#include <set>

namespace atgforge::lean {

namespace {

void expect_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ProtocolError(std::string(what) + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ProtocolError(std::string(what) + " has unknown field '" + k + "'");
  }
}

template <class T>
T get_as(const json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string(what) + "." + key + ": " + e.what());
  }
}

json pos_json(const Pos& p) { return json{{"line", p.line}, {"column", p.column}}; }

Pos pos_from(const json& j, const char* what) {
  expect_keys(j, {"line", "column"}, what);
  return Pos{get_as<int>(j, "line", what), get_as<int>(j, "column", what)};
}

std::optional<Pos> opt_pos(const json& j, const char* key, const char* what) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return pos_from(j.at(key), what);
}

json message_json(const ReplMessage& m) {
  json j{{"severity", m.severity}, {"pos", pos_json(m.pos)}};
  j["endPos"] = m.end_pos ? pos_json(*m.end_pos) : json(nullptr);
  j["data"] = m.data;
  return j;
}

ReplMessage message_from(const json& j) {
  expect_keys(j, {"severity", "pos", "endPos", "data"}, "message");
  ReplMessage m;
  m.severity = get_as<std::string>(j, "severity", "message");
  m.pos = pos_from(j.at("pos"), "message.pos");
  m.end_pos = opt_pos(j, "endPos", "message.endPos");
  m.data = get_as<std::string>(j, "data", "message");
  return m;
}

json sorry_json(const Sorry& s) {
  json j{{"proofState", s.proof_state}, {"pos", pos_json(s.pos)}, {"goals", s.goals}};
  j["endPos"] = s.end_pos ? pos_json(*s.end_pos) : json(nullptr);
  return j;
}

}  // namespace

ReplCommand ReplCommand::command(std::string code, std::optional<int> env) {
  ReplCommand c;
  c.cmd = std::move(code);
  c.env = env;
  return c;
}

ReplCommand ReplCommand::tactic_on(int proof_state, std::string tactic) {
  ReplCommand c;
  c.proof_state = proof_state;
  c.tactic = std::move(tactic);
  return c;
}

void ReplCommand::validate() const {
  bool as_cmd = cmd.has_value();
  bool as_tactic = proof_state.has_value() || tactic.has_value();
  if (as_cmd == as_tactic) throw ProtocolError("request must carry either cmd or (proofState, tactic)");
  if (as_tactic && !(proof_state && tactic)) throw ProtocolError("tactic request needs both proofState and tactic");
  if (as_tactic && (env || all_tactics)) throw ProtocolError("env/allTactics only apply to cmd requests");
}

json to_json(const ReplCommand& c) {
  c.validate();
  json j = json::object();
  if (c.cmd) j["cmd"] = *c.cmd;
  if (c.env) j["env"] = *c.env;
  if (c.tactic) j["tactic"] = *c.tactic;
  if (c.proof_state) j["proofState"] = *c.proof_state;
  if (c.all_tactics) j["allTactics"] = true;
  return j;
}

ReplCommand command_from_json(const json& j) {
  expect_keys(j, {"cmd", "env", "tactic", "proofState", "allTactics"}, "request");
  ReplCommand c;
  if (j.contains("cmd")) c.cmd = get_as<std::string>(j, "cmd", "request");
  if (j.contains("env")) c.env = get_as<int>(j, "env", "request");
  if (j.contains("tactic")) c.tactic = get_as<std::string>(j, "tactic", "request");
  if (j.contains("proofState")) c.proof_state = get_as<int>(j, "proofState", "request");
  if (j.contains("allTactics")) c.all_tactics = get_as<bool>(j, "allTactics", "request");
  c.validate();
  return c;
}

json to_json(const ReplResponse& r) {
  json j = json::object();
  if (r.env) j["env"] = *r.env;
  j["proofstates"] = r.proofstates;
  j["goals"] = r.goals;
  j["messages"] = json::array();
  for (const auto& m : r.messages) j["messages"].push_back(message_json(m));
  j["sorries"] = json::array();
  for (const auto& s : r.sorries) j["sorries"].push_back(sorry_json(s));
  j["error"] = r.error;
  j["finish"] = r.finish;
  return j;
}

ReplResponse response_from_json(const json& j) {
  expect_keys(j, {"env", "proofstates", "goals", "messages", "sorries", "error", "finish"}, "response");
  ReplResponse r;
  if (j.contains("env") && !j.at("env").is_null()) r.env = get_as<int>(j, "env", "response");
  r.proofstates = get_as<std::vector<int>>(j, "proofstates", "response");
  r.goals = get_as<std::vector<std::string>>(j, "goals", "response");
  for (const auto& m : j.at("messages")) r.messages.push_back(message_from(m));
  for (const auto& s : j.at("sorries")) {
    expect_keys(s, {"proofState", "pos", "goals", "endPos"}, "sorry");
    Sorry out;
    out.proof_state = get_as<int>(s, "proofState", "sorry");
    out.pos = pos_from(s.at("pos"), "sorry.pos");
    out.goals = get_as<std::vector<std::string>>(s, "goals", "sorry");
    out.end_pos = opt_pos(s, "endPos", "sorry.endPos");
    r.sorries.push_back(std::move(out));
  }
  r.error = get_as<bool>(j, "error", "response");
  r.finish = get_as<bool>(j, "finish", "response");
  return r;
}

std::vector<std::string> split_goals(const std::string& block) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= block.size()) {
    std::size_t gap = block.find("\n\n", start);
    std::string piece = block.substr(start, gap == std::string::npos ? std::string::npos : gap - start);
    if (!piece.empty()) out.push_back(piece);
    if (gap == std::string::npos) break;
    start = gap + 2;
  }
  return out;
}

ReplResponse response_from_wire(const json& raw) {
  if (!raw.is_object()) throw ProtocolError("reply must be a JSON object");
  ReplResponse r;
  try {
    if (raw.contains("message") && raw.at("message").is_string()) {
      // The REPL reports request-level failures (bad proof state, ...) this way.
      r.messages.push_back({"error", {}, std::nullopt, raw.at("message").get<std::string>()});
    }
    if (raw.contains("env") && !raw.at("env").is_null()) r.env = raw.at("env").get<int>();
    if (raw.contains("proofState")) r.proofstates.push_back(raw.at("proofState").get<int>());
    if (raw.contains("proofstates")) {
      for (int id : raw.at("proofstates").get<std::vector<int>>()) r.proofstates.push_back(id);
    }
    if (raw.contains("goals")) {
      const json& g = raw.at("goals");
      r.goals = g.is_string() ? split_goals(g.get<std::string>()) : g.get<std::vector<std::string>>();
    }
    if (raw.contains("messages")) {
      for (const auto& m : raw.at("messages")) r.messages.push_back(message_from(m));
    }
    if (raw.contains("sorries")) {
      for (const auto& s : raw.at("sorries")) {
        Sorry out;
        out.proof_state = s.at("proofState").get<int>();
        out.pos = pos_from(s.at("pos"), "sorry.pos");
        out.end_pos = opt_pos(s, "endPos", "sorry.endPos");
        if (s.contains("goal")) out.goals = split_goals(s.at("goal").get<std::string>());
        if (s.contains("goals")) out.goals = s.at("goals").get<std::vector<std::string>>();
        r.sorries.push_back(std::move(out));
      }
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed reply: ") + e.what());
  }
  bool sorry_warning = false;
  for (const auto& m : r.messages) {
    if (m.severity == "error") r.error = true;
    if (m.data.find("declaration uses 'sorry'") != std::string::npos) sorry_warning = true;
  }
  r.finish = !r.error && r.goals.empty() && r.sorries.empty() && !sorry_warning;
  return r;
}

}  // namespace atgforge::lean
