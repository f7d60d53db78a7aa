#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atgforge/extract/extract.hpp"
#include "atgforge/pipeline/config.hpp"
#include "atgforge/search/search.hpp"
#include "atgforge/validate/validate.hpp"

namespace atgforge {

/// Thrown after the stage named in RunOptions::stop_after has been persisted.
class StopRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  /// "extract" or "<iteration>/<stage>" with stage one of refresh, train,
  /// generate, validate, merge. Also read from ATGFORGE_STOP_AFTER.
  std::optional<std::string> stop_after;
};

struct GenerationSummary {
  std::size_t p3s = 0;
  std::size_t proofs_found = 0;
  std::size_t candidate_paths = 0;
  std::size_t non_transformable = 0;
};

json summary_to_json(const GenerationSummary& s);
GenerationSummary summary_from_json(const json& j);

struct GenerationBatch {
  std::vector<TheoremRecord> candidates;
  std::vector<CandidatePath> paths;
  GenerationSummary summary;
};

/// Search every P3 (fanned out over `workers` prover sessions, merged in P3
/// order) and synthesize candidate theorems. Names get the suffix `_i<n>`.
GenerationBatch generate_candidates(const std::vector<P3>& p3s, const std::map<std::string, TheoremRecord>& roots,
                                    Suggester& suggester, const ProverFactory& prover_factory,
                                    const Guidance* guidance, const SearchLimits& limits, std::size_t workers,
                                    int iteration);

/// Pairs from replaying accepted records (what the next refresh learns from).
std::vector<StateTacticPair> record_pairs(const std::vector<TheoremRecord>& records, Prover& prover);

struct IterationRecord {
  int iteration = 0;  // 1-based
  std::vector<TheoremRecord> generated;  // G_i
  std::vector<TheoremRecord> validated;  // G_i*
  std::vector<Reject> rejects;
  DatasetStats stats;
  GenerationSummary summary;
  std::size_t e_star_size = 0;  // |E*| after this iteration
};

struct IterationLedger {
  std::vector<IterationRecord> iterations;
  std::vector<TheoremRecord> e_star;
  std::size_t p3_count = 0;
  std::vector<StateTacticPair> seed_pairs;
  std::vector<StateTacticPair> pairs;  // from every G_i*
  std::vector<std::string> resumed_stages;
};

/// Number of generation passes for max_iterations = n.
int generation_passes(int n);

/// The full loop. Artifacts land in config.out_dir; an existing run with the
/// same config digest is resumed stage by stage.
IterationLedger run_atg4ci(const PipelineConfig& config, const RunOptions& options = {});

struct StatsReport {
  std::vector<std::pair<int, DatasetStats>> iterations;
  DatasetStats total;

  json to_json() const;
  static StatsReport from_json(const json& j);
  /// Plain-text table: one column per iteration plus the total.
  std::string table() const;
};

StatsReport compute_stats(const IterationLedger& ledger);

/// Seed pairs plus pairs of every validated record, one instruction record
/// per distinct (prompt, response).
std::vector<FinetuneRecord> export_finetune_data(const IterationLedger& ledger, const std::filesystem::path& path);

}  // namespace atgforge
