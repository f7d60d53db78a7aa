#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"
#include "atgforge/prover/prover.hpp"
#include "atgforge/suggest/suggest.hpp"

namespace atgforge {

enum class Verdict { Correct, Incomplete, TypeError, LogicalError, RedundantSteps, Unrepairable };

std::string_view to_string(Verdict v);

struct ValidationOutcome {
  Verdict verdict = Verdict::Unrepairable;
  std::vector<std::string> messages;
  std::optional<TheoremRecord> repaired;
};

class RepairFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Erases x + 0, 0 + x, x - 0, x * 1, 1 * x and x / 1 throughout a statement.
/// Text the mock parser cannot read is only normalized.
std::string simplify_identities(std::string_view statement);

/// Identity key used for merging: the simplified goal and premises.
std::string dedup_key(const TheoremRecord& record);

struct DedupResult {
  std::vector<TheoremRecord> unique;
  std::size_t duplicates = 0;
};

/// Keeps the first record of each key, in input order.
DedupResult dedup(const std::vector<TheoremRecord>& records);

/// Verdict only (`repaired` is never set). Timeouts become Unrepairable.
ValidationOutcome classify(const TheoremRecord& record, Prover& prover);

/// Truncates at the shortest prefix that closes every goal.
TheoremRecord repair_redundant(const TheoremRecord& record, Prover& prover);

/// Copies type ascriptions from the root statement onto bare coercion markers
/// and negative literals of the candidate, then re-verifies.
TheoremRecord repair_type(const TheoremRecord& record, const TheoremRecord& root, Prover& prover);

struct RepairBudget {
  int simulations = 100;
  int candidates = 16;
  double exploration = std::sqrt(2.0);
  int max_depth = 8;
};

double ucb1_score(double w, int n, int parent_n, double c);

/// Index of the child to visit: the first unvisited one, otherwise the UCB1
/// argmax (first index wins ties). `visits` and `wins` are parallel.
std::size_t ucb1_select(const std::vector<int>& visits, const std::vector<double>& wins, int parent_visits, double c);

/// Drops the failing tail (if any), then searches with UCB1 for a suffix that
/// closes all goals; reward is 1 for closing, 0 otherwise.
TheoremRecord repair_incomplete(const TheoremRecord& record, Prover& prover, Suggester& suggester,
                                const RepairBudget& budget = {});

struct ValidateOptions {
  RepairBudget budget;
  std::size_t workers = 1;
  /// Roots for type repair, by name (from provenance.root_name).
  const std::map<std::string, TheoremRecord>* roots = nullptr;
};

struct Reject {
  TheoremRecord record;
  Verdict verdict;
  std::vector<std::string> messages;
};

json reject_to_json(const Reject& r);

struct ValidationReport {
  std::vector<TheoremRecord> dataset;
  std::vector<Reject> rejects;
  DatasetStats stats;
};

/// dedup, classify, repair where possible, and re-verify everything accepted.
ValidationReport validate_all(const std::vector<TheoremRecord>& records, const ProverFactory& prover_factory,
                              Suggester& suggester, const ValidateOptions& options = {});

}  // namespace atgforge
