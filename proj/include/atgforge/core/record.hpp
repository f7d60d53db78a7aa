#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace atgforge {

using json = nlohmann::json;

enum class TacticKind { rewrite, simp, have, assumption, rfl, other };

std::string_view to_string(TacticKind kind);

/// Kind implied by the leading token of a tactic string.
TacticKind classify_tactic(std::string_view text);

/// Lean parser node name for a tactic kind, as reported in extraction output.
std::string_view lean_syntax_name(TacticKind kind);

class TacticStep {
 public:
  explicit TacticStep(std::string text);

  const std::string& text() const { return text_; }
  TacticKind kind() const { return kind_; }

  friend bool operator==(const TacticStep&, const TacticStep&) = default;

 private:
  std::string text_;
  TacticKind kind_;
};

std::vector<TacticStep> make_steps(const std::vector<std::string>& texts);
std::vector<std::string> step_texts(const std::vector<TacticStep>& steps);

struct Premise {
  std::string name;
  std::string type_expr;
  friend bool operator==(const Premise&, const Premise&) = default;
};

enum class RecordSource { seed, generated, corrected };

std::string_view to_string(RecordSource source);

struct Provenance {
  std::string root_name;
  std::string path_id;
  std::size_t prediction_steps = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TheoremRecord {
  std::string name;
  std::vector<std::string> imports;
  std::vector<Premise> premises;
  std::string goal;
  std::vector<TacticStep> proof;
  RecordSource source = RecordSource::seed;
  std::optional<Provenance> provenance;

  /// Throws std::invalid_argument naming the violated invariant.
  void check_invariants() const;

  friend bool operator==(const TheoremRecord&, const TheoremRecord&) = default;
};

struct StateTacticPair {
  std::string pp;
  std::string name;
  std::vector<std::string> goals_before;
  std::vector<std::string> goals_after;
  friend bool operator==(const StateTacticPair&, const StateTacticPair&) = default;
};

/// Serialized with the extraction field names: pp, name, goalsBefore, goalsAfter.
json pair_to_json(const StateTacticPair& pair);
StateTacticPair pair_from_json(const json& j);

class MalformedRecord : public std::runtime_error {
 public:
  MalformedRecord(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (at byte " + std::to_string(byte_offset) + ")"), offset_(byte_offset) {}
  std::size_t byte_offset() const { return offset_; }

 private:
  std::size_t offset_;
};

std::string encode_record(const TheoremRecord& record);
TheoremRecord decode_record(std::string_view line);

json record_to_json(const TheoremRecord& record);

std::vector<TheoremRecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<TheoremRecord>& records);

std::vector<StateTacticPair> read_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path, const std::vector<StateTacticPair>& pairs);

/// Writes via a temporary sibling and rename, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

enum class StatsCategory { deduplicated, correct, corrected, fresh };

std::string_view to_string(StatsCategory category);

using StepHistogram = std::map<std::size_t, std::size_t>;

/// Candidate / deduplicated / correct / corrected / new counters with
/// per-prediction-step histograms. n_new is always n_correct + n_corrected.
class DatasetStats {
 public:
  DatasetStats() = default;
  DatasetStats(std::size_t n_candidate, std::size_t n_deduplicated, std::size_t n_correct, std::size_t n_corrected,
               std::size_t n_new, std::map<StatsCategory, StepHistogram> histograms = {});

  std::size_t n_candidate() const { return n_candidate_; }
  std::size_t n_deduplicated() const { return n_deduplicated_; }
  std::size_t n_correct() const { return n_correct_; }
  std::size_t n_corrected() const { return n_corrected_; }
  std::size_t n_new() const { return n_correct_ + n_corrected_; }
  const StepHistogram& histogram(StatsCategory category) const;

  void add_candidates(std::size_t n) { n_candidate_ += n; }
  void add_deduplicated(std::size_t prediction_steps);
  void add_correct(std::size_t prediction_steps);
  void add_corrected(std::size_t prediction_steps);

  DatasetStats& operator+=(const DatasetStats& other);

  json to_json() const;
  static DatasetStats from_json(const json& j);

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;

 private:
  void bump(StatsCategory category, std::size_t steps);

  std::size_t n_candidate_ = 0;
  std::size_t n_deduplicated_ = 0;
  std::size_t n_correct_ = 0;
  std::size_t n_corrected_ = 0;
  std::map<StatsCategory, StepHistogram> histograms_;
};

}  // namespace atgforge
