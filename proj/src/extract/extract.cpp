#include "atgforge/extract/extract.hpp"

#include <spdlog/spdlog.h>

#include "atgforge/core/text.hpp"

namespace atgforge {

std::string_view to_string(TreeTerminal t) {
  switch (t) {
    case TreeTerminal::no_goals: return "no_goals";
    case TreeTerminal::error: return "error";
    case TreeTerminal::open: return "open";
  }
  return "open";
}

SeedReplayFailed::SeedReplayFailed(std::string theorem, std::size_t step_index, std::string message)
    : std::runtime_error("seed " + theorem + " failed at step " + std::to_string(step_index) + ": " + message),
      theorem_(std::move(theorem)),
      step_(step_index),
      message_(std::move(message)) {}

ProofTree build_proof_tree(const TheoremRecord& theorem, Prover& prover) {
  ProofTree tree;
  tree.root = theorem;
  tree.layers.push_back({prover.get_init_state(theorem), std::nullopt});
  for (const auto& step : theorem.proof) {
    const ProofState& last = tree.layers.back().state;
    if (last.error) break;
    tree.layers.push_back({prover.run_tactic(last, step), step});
  }
  const ProofState& last = tree.layers.back().state;
  if (last.error) {
    tree.terminal = TreeTerminal::error;
  } else if (last.finished) {
    tree.terminal = TreeTerminal::no_goals;
  } else {
    tree.terminal = TreeTerminal::open;
  }
  return tree;
}

ProofTree build_seed_tree(const TheoremRecord& theorem, Prover& prover) {
  if (theorem.proof.empty()) throw SeedReplayFailed(theorem.name, 0, "seed has no proof");
  ProofTree tree = build_proof_tree(theorem, prover);
  switch (tree.terminal) {
    case TreeTerminal::no_goals:
      for (std::size_t i = 1; i < tree.layers.size(); ++i) {
        if (tree.layers[i].state.has_warning_containing("sorry")) {
          throw SeedReplayFailed(theorem.name, i, "seed proof uses sorry");
        }
      }
      return tree;
    case TreeTerminal::error:
      throw SeedReplayFailed(theorem.name, tree.tactic_count(), tree.layers.back().state.first_error());
    case TreeTerminal::open:
      throw SeedReplayFailed(theorem.name, tree.tactic_count(), "goals remain after the last tactic");
  }
  return tree;
}

std::vector<P3> extract_p3s(const ProofTree& tree) {
  std::vector<P3> out;
  if (tree.terminal != TreeTerminal::no_goals) return out;
  std::size_t n = tree.tactic_count();
  for (std::size_t len = 1; len + 1 <= n; ++len) {
    P3 p;
    p.path_id = tree.root.name + "/p" + std::to_string(len);
    p.root = tree.root;
    for (std::size_t i = 1; i <= len; ++i) p.prefix.push_back(*tree.layers[i].incoming);
    p.tip_state = tree.layers[len].state;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<StateTacticPair> extract_state_tactic_pairs(const ProofTree& tree) {
  std::vector<StateTacticPair> out;
  for (std::size_t i = 1; i < tree.layers.size(); ++i) {
    const ProofState& before = tree.layers[i - 1].state;
    const ProofState& after = tree.layers[i].state;
    if (after.error || before.goals.empty()) break;
    const TacticStep& t = *tree.layers[i].incoming;
    out.push_back({t.text(), std::string(lean_syntax_name(t.kind())), before.goals, after.goals});
  }
  return out;
}

json p3_to_json(const P3& p3) {
  return json{{"path_id", p3.path_id},
              {"root", record_to_json(p3.root)},
              {"prefix", step_texts(p3.prefix)},
              {"tip", state_to_json(p3.tip_state)}};
}

P3 p3_from_json(const json& j) {
  P3 p;
  p.path_id = j.at("path_id").get<std::string>();
  p.root = decode_record(j.at("root").dump());
  p.prefix = make_steps(j.at("prefix").get<std::vector<std::string>>());
  p.tip_state = state_from_json(j.at("tip"));
  return p;
}

std::vector<P3> read_p3s(const std::filesystem::path& path) {
  std::vector<P3> out;
  for (const auto& line : split_lines(read_file(path))) {
    if (trim(line).empty()) continue;
    out.push_back(p3_from_json(json::parse(line)));
  }
  return out;
}

void write_p3s(const std::filesystem::path& path, const std::vector<P3>& p3s) {
  std::string body;
  for (const auto& p : p3s) body += p3_to_json(p).dump() + "\n";
  write_file_atomic(path, body);
}

Extraction extract_all(const std::vector<TheoremRecord>& seeds, Prover& prover) {
  Extraction ex;
  for (const auto& seed : seeds) {
    try {
      ProofTree tree = build_seed_tree(seed, prover);
      auto p3s = extract_p3s(tree);
      auto pairs = extract_state_tactic_pairs(tree);
      ex.p3s.insert(ex.p3s.end(), p3s.begin(), p3s.end());
      ex.pairs.insert(ex.pairs.end(), pairs.begin(), pairs.end());
    } catch (const SeedReplayFailed& e) {
      spdlog::warn("skipping seed: {}", e.what());
      ex.skipped.push_back(seed.name);
    }
  }
  return ex;
}

}  // namespace atgforge
