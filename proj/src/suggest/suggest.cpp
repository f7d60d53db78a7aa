#include "atgforge/suggest/suggest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include <spdlog/spdlog.h>

#include "atgforge/core/text.hpp"
#include "atgforge/prover/expr.hpp"
#include "atgforge/prover/mock_prover.hpp"

namespace atgforge {

std::vector<CandidateTactic> rank_candidates(std::vector<CandidateTactic> candidates, std::size_t t) {
  std::map<std::string, CandidateTactic> best;
  for (auto& c : candidates) {
    std::string key = normalize_text(c.text);
    if (key.empty() || !std::isfinite(c.score)) continue;
    c.text = key;
    auto it = best.find(key);
    if (it == best.end() || c.score > it->second.score) best[key] = c;
  }
  std::vector<CandidateTactic> out;
  out.reserve(best.size());
  for (auto& [_, c] : best) out.push_back(std::move(c));
  std::stable_sort(out.begin(), out.end(), [](const CandidateTactic& a, const CandidateTactic& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.text < b.text;
  });
  if (out.size() > t) out.resize(t);
  return out;
}

const std::vector<std::string>& mock_tactic_universe() {
  static const std::vector<std::string> universe = [] {
    std::vector<std::string> u;
    for (const char* r : {"add_zero", "zero_add", "mul_one", "one_mul", "add_comm", "mul_comm", "add_assoc",
                          "mul_assoc", "mul_sum", "sum_shift", "sub_self", "two_mul"}) {
      u.push_back(std::string("rw [") + r + "]");
    }
    u.insert(u.end(), {"simp", "rfl", "assumption"});
    return u;
  }();
  return universe;
}

namespace {

std::string symbol(const mock::Expr& e) {
  using mock::Op;
  switch (e.op) {
    case Op::num: return e.value <= 2 ? std::to_string(e.value) : "lit";
    case Op::var: return "v";
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::neg: return "neg";
    case Op::app: return "app";
    case Op::coe: return "coe";
    case Op::ascribe: return "ascribe";
    case Op::sum_range: return "sum";
    case Op::sum_ico: return "sumIco";
  }
  return "?";
}

void collect(const mock::ExprPtr& e, int depth, std::vector<std::string>& out) {
  out.push_back(symbol(*e));
  if (depth >= 2) return;
  for (const auto& a : e->args) collect(a, depth + 1, out);
}

}  // namespace

std::string goal_feature_key(const std::vector<std::string>& goals) {
  if (goals.empty()) return "<none>";
  try {
    mock::Goal g = mock::parse_goal(goals.front());
    std::vector<std::string> syms;
    collect(g.target.lhs, 0, syms);
    collect(g.target.rhs, 0, syms);
    std::sort(syms.begin(), syms.end());
    std::string key = symbol(*g.target.lhs) + "=" + symbol(*g.target.rhs) + "|";
    for (const auto& s : syms) key += s + ",";
    if (!g.hyps.empty()) key += "|hyp";
    return key;
  } catch (const mock::ParseError&) {
    // Not a mock goal: fall back to the first token after the turnstile.
    std::string target = mock::goal_target_text(goals.front());
    return "raw|" + target.substr(0, target.find(' '));
  }
}

RuleFrequencySuggester::RuleFrequencySuggester(std::vector<std::string> base_vocabulary, double smoothing)
    : smoothing_(smoothing) {
  if (!(smoothing > 0)) throw std::invalid_argument("smoothing must be positive");
  for (auto& v : base_vocabulary) v = normalize_text(v);
  std::sort(base_vocabulary.begin(), base_vocabulary.end());
  base_vocabulary.erase(std::unique(base_vocabulary.begin(), base_vocabulary.end()), base_vocabulary.end());
  vocabulary_ = std::move(base_vocabulary);
}

double RuleFrequencySuggester::score_unlocked(const std::string& key, const std::string& tactic) const {
  std::size_t c = 0;
  std::size_t total = 0;
  if (auto it = counts_.find(key); it != counts_.end()) {
    if (auto jt = it->second.find(tactic); jt != it->second.end()) c = jt->second;
    total = totals_.at(key);
  }
  double v = static_cast<double>(vocabulary_.size());
  return std::log((static_cast<double>(c) + smoothing_) / (static_cast<double>(total) + smoothing_ * v));
}

double RuleFrequencySuggester::score(const std::string& key, const std::string& tactic) const {
  std::shared_lock lock(mutex_);
  return score_unlocked(key, normalize_text(tactic));
}

std::size_t RuleFrequencySuggester::count(const std::string& key, const std::string& tactic) const {
  std::shared_lock lock(mutex_);
  auto it = counts_.find(key);
  if (it == counts_.end()) return 0;
  auto jt = it->second.find(normalize_text(tactic));
  return jt == it->second.end() ? 0 : jt->second;
}

std::size_t RuleFrequencySuggester::vocabulary_size() const {
  std::shared_lock lock(mutex_);
  return vocabulary_.size();
}

std::vector<CandidateTactic> RuleFrequencySuggester::suggest(const std::vector<std::string>& goals, std::size_t t) {
  if (goals.empty() || t == 0) return {};
  std::string key = goal_feature_key(goals);
  std::shared_lock lock(mutex_);
  std::vector<CandidateTactic> all;
  all.reserve(vocabulary_.size());
  for (const auto& tactic : vocabulary_) all.push_back({tactic, score_unlocked(key, tactic)});
  return rank_candidates(std::move(all), t);
}

void RuleFrequencySuggester::refresh(const std::vector<StateTacticPair>& pairs) {
  std::unique_lock lock(mutex_);
  for (const auto& p : pairs) {
    std::string tactic = normalize_text(p.pp);
    if (tactic.empty() || p.goals_before.empty()) continue;
    std::string key = goal_feature_key(p.goals_before);
    ++counts_[key][tactic];
    ++totals_[key];
    auto pos = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), tactic);
    if (pos == vocabulary_.end() || *pos != tactic) vocabulary_.insert(pos, tactic);
  }
}

json RuleFrequencySuggester::to_json() const {
  std::shared_lock lock(mutex_);
  json counts = json::object();
  for (const auto& [key, m] : counts_) counts[key] = m;
  return json{{"smoothing", smoothing_}, {"vocabulary", vocabulary_}, {"counts", counts}};
}

std::unique_ptr<RuleFrequencySuggester> RuleFrequencySuggester::from_json(const json& j) {
  auto s = std::make_unique<RuleFrequencySuggester>(j.at("vocabulary").get<std::vector<std::string>>(),
                                                    j.at("smoothing").get<double>());
  for (const auto& [key, m] : j.at("counts").items()) {
    for (const auto& [tactic, n] : m.items()) {
      s->counts_[key][tactic] = n.get<std::size_t>();
      s->totals_[key] += n.get<std::size_t>();
    }
  }
  return s;
}

std::string format_prompt(const std::vector<std::string>& goals) {
  std::string prompt =
      "You are using Lean 4 for theorem proving. You are proving a theorem in Lean 4. Based on the current state of "
      "the theorem, provide the most reasonable proof tactic. Ensure your tactic is syntactically correct according "
      "to Lean 4's tactic syntax and effectively progresses the proof.\n\n[Current State]:\n";
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (i > 0) prompt += "\n\n";
    prompt += goals[i];
  }
  prompt += "\n\n[Output Tactic]:\n";
  return prompt;
}

std::vector<CandidateTactic> parse_completion(std::string_view reply) {
  std::vector<CandidateTactic> out;
  for (const auto& raw : split_lines(reply)) {
    std::string line = trim(raw);
    std::size_t comma = line.rfind(',');
    if (comma == std::string::npos) continue;
    std::string tactic = trim(std::string_view(line).substr(0, comma));
    std::string number = trim(std::string_view(line).substr(comma + 1));
    for (std::size_t pos; (pos = number.find("−")) != std::string::npos;) number.replace(pos, 3, "-");
    if (tactic.empty() || number.empty()) continue;
    char* end = nullptr;
    double score = std::strtod(number.c_str(), &end);
    if (end != number.c_str() + number.size() || !std::isfinite(score)) continue;
    out.push_back({tactic, score});
  }
  if (out.empty()) throw EmptyCompletion("no scored tactic line in completion");
  return out;
}

std::vector<FinetuneRecord> finetune_records(const std::vector<StateTacticPair>& pairs) {
  std::vector<FinetuneRecord> out;
  std::set<FinetuneRecord> seen;
  for (const auto& p : pairs) {
    FinetuneRecord r{format_prompt(p.goals_before), p.pp};
    if (seen.insert(r).second) out.push_back(std::move(r));
  }
  return out;
}

void write_finetune_records(const std::filesystem::path& path, const std::vector<FinetuneRecord>& records) {
  std::string body;
  for (const auto& r : records) body += json{{"prompt", r.prompt}, {"response", r.response}}.dump() + "\n";
  write_file_atomic(path, body);
}

FallbackSuggester::FallbackSuggester(std::shared_ptr<Suggester> primary, std::shared_ptr<Suggester> fallback)
    : primary_(std::move(primary)), fallback_(std::move(fallback)) {}

std::vector<CandidateTactic> FallbackSuggester::suggest(const std::vector<std::string>& goals, std::size_t t) {
  try {
    return primary_->suggest(goals, t);
  } catch (const RemoteUnavailable& e) {
    spdlog::warn("{} unavailable, using {}: {}", primary_->name(), fallback_->name(), e.what());
    return fallback_->suggest(goals, t);
  }
}

void FallbackSuggester::refresh(const std::vector<StateTacticPair>& pairs) {
  primary_->refresh(pairs);
  fallback_->refresh(pairs);
}

}  // namespace atgforge
