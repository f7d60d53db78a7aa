#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "atgforge/core/record.hpp"

namespace atgforge {

struct CandidateTactic {
  std::string text;
  double score = 0.0;  // log-likelihood
  friend bool operator==(const CandidateTactic&, const CandidateTactic&) = default;
};

class RemoteUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCompletion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deduplicates by normalized text (keeping the higher score), sorts by
/// descending score then text, drops empty tactics and truncates to `t`.
std::vector<CandidateTactic> rank_candidates(std::vector<CandidateTactic> candidates, std::size_t t);

/// Source of scored candidate tactics for a proof state.
class Suggester {
 public:
  virtual ~Suggester() = default;
  virtual std::string name() const = 0;
  virtual std::vector<CandidateTactic> suggest(const std::vector<std::string>& goals, std::size_t t) = 0;
  virtual void refresh(const std::vector<StateTacticPair>& pairs) = 0;
};

/// The tactics the mock backend understands without arguments from context.
const std::vector<std::string>& mock_tactic_universe();

/// Feature key of a goal list: the head symbols of both sides of the first
/// goal's target plus the sorted multiset of operator symbols near the top.
std::string goal_feature_key(const std::vector<std::string>& goals);

class RuleFrequencySuggester final : public Suggester {
 public:
  explicit RuleFrequencySuggester(std::vector<std::string> base_vocabulary = mock_tactic_universe(),
                                  double smoothing = 1.0);

  std::string name() const override { return "rules"; }
  std::vector<CandidateTactic> suggest(const std::vector<std::string>& goals, std::size_t t) override;
  void refresh(const std::vector<StateTacticPair>& pairs) override;

  /// log((count + s) / (total + s * V)) for the feature key and tactic.
  double score(const std::string& feature_key, const std::string& tactic) const;
  std::size_t count(const std::string& feature_key, const std::string& tactic) const;
  std::size_t vocabulary_size() const;

  json to_json() const;
  static std::unique_ptr<RuleFrequencySuggester> from_json(const json& j);

 private:
  double score_unlocked(const std::string& feature_key, const std::string& tactic) const;

  mutable std::shared_mutex mutex_;
  std::vector<std::string> vocabulary_;  // sorted, unique
  std::map<std::string, std::map<std::string, std::size_t>> counts_;
  std::map<std::string, std::size_t> totals_;
  double smoothing_;
};

/// Instruction header, "[Current State]:" with the goals, "[Output Tactic]:".
std::string format_prompt(const std::vector<std::string>& goals);

/// Parses "<tactic> , <score>" lines, dropping malformed or unscored ones.
/// Throws EmptyCompletion when nothing parses.
std::vector<CandidateTactic> parse_completion(std::string_view reply);

struct FinetuneRecord {
  std::string prompt;
  std::string response;
  friend auto operator<=>(const FinetuneRecord&, const FinetuneRecord&) = default;
};

/// One record per distinct (prompt, response) pair, in first-seen order.
std::vector<FinetuneRecord> finetune_records(const std::vector<StateTacticPair>& pairs);
void write_finetune_records(const std::filesystem::path& path, const std::vector<FinetuneRecord>& records);

struct RemoteConfig {
  std::string url;  // e.g. http://127.0.0.1:8000/generate
  int max_tokens = 64;
  int max_inflight = 4;
  double timeout_secs = 60.0;
  std::filesystem::path export_path;  // refresh export target (optional)
  std::string refresh_hook;           // shell command run after export (optional)
};

/// Client for a text-generation server. POSTs {prompt, n, max_tokens}; the
/// reply is JSON with either "text" (newline-separated "tactic , score"
/// lines) or "completions" (a list of such lines).
class RemoteSuggester final : public Suggester {
 public:
  explicit RemoteSuggester(RemoteConfig config);
  ~RemoteSuggester() override;

  std::string name() const override { return "remote"; }
  std::vector<CandidateTactic> suggest(const std::vector<std::string>& goals, std::size_t t) override;
  void refresh(const std::vector<StateTacticPair>& pairs) override;

  /// Waits for any refresh hook still running.
  void wait_for_refresh();

 private:
  RemoteConfig config_;
  std::counting_semaphore<1024> inflight_;
  std::mutex hook_mutex_;
  std::vector<std::future<void>> hooks_;
};

/// Uses `primary`, falling back to `fallback` when it raises RemoteUnavailable.
class FallbackSuggester final : public Suggester {
 public:
  FallbackSuggester(std::shared_ptr<Suggester> primary, std::shared_ptr<Suggester> fallback);
  std::string name() const override { return primary_->name() + "+" + fallback_->name(); }
  std::vector<CandidateTactic> suggest(const std::vector<std::string>& goals, std::size_t t) override;
  void refresh(const std::vector<StateTacticPair>& pairs) override;

 private:
  std::shared_ptr<Suggester> primary_;
  std::shared_ptr<Suggester> fallback_;
};

}  // namespace atgforge
