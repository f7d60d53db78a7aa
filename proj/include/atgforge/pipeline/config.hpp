#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"
#include "atgforge/prover/prover.hpp"
#include "atgforge/search/search.hpp"
#include "atgforge/suggest/suggest.hpp"
#include "atgforge/validate/validate.hpp"

namespace atgforge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LeanSettings {
  std::string repl_path;
  std::vector<std::string> repl_args;
  double timeout_secs = 0;  // 0: ATGFORGE_LEAN_TIMEOUT_SECS or 60
  std::string header = "import Mathlib\nopen Finset Nat";
};

struct SuggestSettings {
  std::size_t t = 16;
  std::string source = "rules";  // rules | remote
  RemoteConfig remote;
};

struct EvalSettings {
  std::filesystem::path testset;
  double wall_time_secs = 600;
  std::size_t width = 16;
  std::size_t max_expansions = 512;
  int max_depth = 20;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  int max_iterations = 2;
  std::string prover = "mock";  // mock | lean
  LeanSettings lean;
  SuggestSettings suggest;
  SearchLimits search;
  bool guidance = true;
  RepairBudget repair;
  std::size_t workers = 1;
  std::filesystem::path seeds;
  std::filesystem::path out_dir = "out";
  EvalSettings eval;

  /// Throws ConfigError naming the first violated constraint.
  void check() const;
};

/// Missing keys keep their defaults; unknown keys are errors.
PipelineConfig config_from_json(const json& j);
json config_to_json(const PipelineConfig& c);
PipelineConfig load_config(const std::filesystem::path& path);

/// Digest of everything that can change results (workers excluded).
std::string config_digest(const PipelineConfig& c);

/// Seed for one stochastic stage, derived from the config seed.
std::uint64_t stage_seed(std::uint64_t seed, int iteration, std::string_view stage);

/// Mock factory, or a Lean factory after a start-up probe. The probe throws
/// BackendUnavailable when the REPL cannot be started or imports fail.
ProverFactory make_prover_factory(const PipelineConfig& c);

struct SuggesterSet {
  std::shared_ptr<Suggester> active;
  std::shared_ptr<RuleFrequencySuggester> rules;  // also the fallback of a remote source
};

SuggesterSet make_suggester(const PipelineConfig& c);

}  // namespace atgforge
