#pragma once

#include <string>
#include <vector>

#include "atgforge/core/record.hpp"
#include "atgforge/pipeline/config.hpp"
#include "atgforge/prover/prover.hpp"
#include "atgforge/suggest/suggest.hpp"

namespace atgforge {

struct EvalResult {
  std::string name;
  bool proved = false;
  std::vector<std::string> proof;
  std::size_t expansions = 0;
  bool timed_out = false;
};

struct EvalReport {
  double rate = 0.0;
  std::size_t width = 0;
  double wall_time_secs = 0;
  std::vector<EvalResult> results;

  json to_json() const;
};

/// Best-first search per theorem: the frontier is ordered by the summed
/// suggester scores of the tactics leading to a state (ties: earlier state
/// first). Each expansion asks for `width` candidates. A theorem fails when
/// its wall time, expansion cap or frontier runs out.
EvalResult prove_best_first(const TheoremRecord& theorem, Prover& prover, Suggester& suggester,
                            const EvalSettings& settings);

EvalReport evaluate_pass1(const std::vector<TheoremRecord>& testset, Prover& prover, Suggester& suggester,
                          const EvalSettings& settings);

}  // namespace atgforge
