#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"
#include "atgforge/search/search.hpp"

namespace atgforge {

class NonTransformablePath : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// True for tactics that have an `at h` form (rewrite and simp kinds).
bool transformable(const TacticStep& tactic);

/// The `at <hyp>` form of a transformable tactic.
TacticStep at_hypothesis(const TacticStep& tactic, const std::string& hyp);

/// h, h✝1, h✝2, ... avoiding the given premise names.
std::string fresh_hypothesis_name(const std::vector<Premise>& premises);

/// Injects the root goal as hypothesis h, replays the path tactics on h and
/// closes with `assumption`. The new goal is the target of the first leaf goal.
TheoremRecord make_candidate_theorem(const TheoremRecord& root, const CandidatePath& cp);

struct SynthesisBatch {
  std::vector<TheoremRecord> candidates;
  std::size_t non_transformable = 0;
};

/// Synthesizes every path of `paths` (all sharing `root`), skipping and
/// counting the ones that are not transformable.
SynthesisBatch synthesize(const TheoremRecord& root, const std::vector<CandidatePath>& paths);

}  // namespace atgforge
