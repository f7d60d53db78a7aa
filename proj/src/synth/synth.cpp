#include "atgforge/synth/synth.hpp"

#include <algorithm>

#include "atgforge/core/text.hpp"
#include "atgforge/prover/mock_prover.hpp"

namespace atgforge {

bool transformable(const TacticStep& tactic) {
  if (tactic.kind() != TacticKind::rewrite && tactic.kind() != TacticKind::simp) return false;
  // Already located somewhere else: no second location can be added.
  return tactic.text().find(" at ") == std::string::npos;
}

TacticStep at_hypothesis(const TacticStep& tactic, const std::string& hyp) {
  if (!transformable(tactic)) throw NonTransformablePath("tactic has no at-hypothesis form: " + tactic.text());
  return TacticStep(trim(tactic.text()) + " at " + hyp);
}

std::string fresh_hypothesis_name(const std::vector<Premise>& premises) {
  auto taken = [&](const std::string& n) {
    return std::any_of(premises.begin(), premises.end(), [&](const Premise& p) { return p.name == n; });
  };
  if (!taken("h")) return "h";
  for (int i = 1;; ++i) {
    std::string n = "h✝" + std::to_string(i);
    if (!taken(n)) return n;
  }
}

TheoremRecord make_candidate_theorem(const TheoremRecord& root, const CandidatePath& cp) {
  if (cp.predicted.empty()) throw std::invalid_argument("candidate path " + cp.path_id + " has no predicted steps");
  if (cp.leaf_goals.empty()) throw std::invalid_argument("candidate path " + cp.path_id + " has no leaf goal");
  std::string h = fresh_hypothesis_name(root.premises);
  TheoremRecord out;
  out.name = root.name + "_" + [&] {
    std::string id = cp.path_id;
    for (char& c : id) {
      if (c == '/') c = '_';
    }
    auto slash = cp.path_id.find('/');
    return slash == std::string::npos ? id : id.substr(slash + 1);
  }();
  out.imports = root.imports;
  out.premises = root.premises;
  out.premises.push_back({h, normalize_text(root.goal)});
  out.goal = normalize_text(mock::goal_target_text(cp.leaf_goals.front()));
  for (const auto* part : {&cp.prefix_from_p3, &cp.predicted}) {
    for (const auto& t : *part) out.proof.push_back(at_hypothesis(t, h));
  }
  out.proof.emplace_back("assumption");
  out.source = RecordSource::generated;
  out.provenance = Provenance{root.name, cp.path_id, cp.predicted.size()};
  return out;
}

SynthesisBatch synthesize(const TheoremRecord& root, const std::vector<CandidatePath>& paths) {
  SynthesisBatch batch;
  for (const auto& cp : paths) {
    try {
      batch.candidates.push_back(make_candidate_theorem(root, cp));
    } catch (const NonTransformablePath&) {
      ++batch.non_transformable;
    }
  }
  return batch;
}

}  // namespace atgforge
