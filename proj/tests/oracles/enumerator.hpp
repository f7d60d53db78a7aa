#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"
#include "atgforge/prover/prover.hpp"

namespace atgforge::oracle {

/// The tactic alphabet the enumerator explores, listed independently of the
/// suggesters under test.
const std::vector<std::string>& tactic_alphabet();

struct EnumerationResult {
  std::optional<std::vector<std::string>> proof;  // shortest, if any
  std::size_t states_visited = 0;
};

/// Breadth-first enumeration of tactic sequences up to `depth` steps from the
/// state `start`, deduplicating on goal lists.
EnumerationResult enumerate(Prover& prover, const ProofState& start, int depth);

EnumerationResult enumerate(Prover& prover, const TheoremRecord& theorem, int depth);

}  // namespace atgforge::oracle
