#include "atgforge/core/record.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "atgforge/core/text.hpp"

namespace atgforge {

std::string_view to_string(TacticKind kind) {
  switch (kind) {
    case TacticKind::rewrite: return "rewrite";
    case TacticKind::simp: return "simp";
    case TacticKind::have: return "have";
    case TacticKind::assumption: return "assumption";
    case TacticKind::rfl: return "rfl";
    case TacticKind::other: return "other";
  }
  return "other";
}

TacticKind classify_tactic(std::string_view text) {
  std::string t = trim(text);
  std::string_view v = t;
  if (starts_with_word(v, "rw") || starts_with_word(v, "rewrite") || starts_with_word(v, "rwa")) {
    return TacticKind::rewrite;
  }
  if (starts_with_word(v, "simp") || starts_with_word(v, "simp_all")) return TacticKind::simp;
  if (starts_with_word(v, "have")) return TacticKind::have;
  if (starts_with_word(v, "assumption")) return TacticKind::assumption;
  if (starts_with_word(v, "rfl")) return TacticKind::rfl;
  return TacticKind::other;
}

std::string_view lean_syntax_name(TacticKind kind) {
  switch (kind) {
    case TacticKind::rewrite: return "Lean.Parser.Tactic.rwSeq";
    case TacticKind::simp: return "Lean.Parser.Tactic.simp";
    case TacticKind::have: return "Lean.Parser.Tactic.tacticHave_";
    case TacticKind::assumption: return "Lean.Parser.Tactic.assumption";
    case TacticKind::rfl: return "Lean.Parser.Tactic.tacticRfl";
    case TacticKind::other: return "Lean.Parser.Tactic.other";
  }
  return "Lean.Parser.Tactic.other";
}

TacticStep::TacticStep(std::string text) : text_(std::move(text)), kind_(classify_tactic(text_)) {
  if (trim(text_).empty()) throw std::invalid_argument("tactic text must be nonempty");
}

std::vector<TacticStep> make_steps(const std::vector<std::string>& texts) {
  std::vector<TacticStep> steps;
  steps.reserve(texts.size());
  for (const auto& t : texts) steps.emplace_back(t);
  return steps;
}

std::vector<std::string> step_texts(const std::vector<TacticStep>& steps) {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.text());
  return out;
}

std::string_view to_string(RecordSource source) {
  switch (source) {
    case RecordSource::seed: return "seed";
    case RecordSource::generated: return "generated";
    case RecordSource::corrected: return "corrected";
  }
  return "seed";
}

void TheoremRecord::check_invariants() const {
  if (name.empty()) throw std::invalid_argument("record name must be nonempty");
  if (proof.empty() && source != RecordSource::seed) {
    throw std::invalid_argument("record " + name + ": only seed stubs may have an empty proof");
  }
  bool derived = source != RecordSource::seed;
  if (derived != provenance.has_value()) {
    throw std::invalid_argument("record " + name + ": provenance must be present exactly for generated/corrected records");
  }
}

json pair_to_json(const StateTacticPair& pair) {
  return json{{"pp", pair.pp}, {"name", pair.name}, {"goalsBefore", pair.goals_before}, {"goalsAfter", pair.goals_after}};
}

StateTacticPair pair_from_json(const json& j) {
  StateTacticPair p;
  p.pp = j.at("pp").get<std::string>();
  p.name = j.at("name").get<std::string>();
  p.goals_before = j.at("goalsBefore").get<std::vector<std::string>>();
  p.goals_after = j.at("goalsAfter").get<std::vector<std::string>>();
  return p;
}

json record_to_json(const TheoremRecord& r) {
  json premises = json::array();
  for (const auto& p : r.premises) premises.push_back(json{{"name", p.name}, {"type", p.type_expr}});
  json j{{"name", r.name},
         {"imports", r.imports},
         {"premises", premises},
         {"goal", r.goal},
         {"proof", step_texts(r.proof)},
         {"source", std::string(to_string(r.source))}};
  if (r.provenance) {
    j["provenance"] = json{{"root_name", r.provenance->root_name},
                           {"path_id", r.provenance->path_id},
                           {"prediction_steps", r.provenance->prediction_steps}};
  }
  return j;
}

std::string encode_record(const TheoremRecord& record) {
  record.check_invariants();
  return record_to_json(record).dump();
}

namespace {

std::size_t key_offset(std::string_view line, std::string_view key) {
  std::string quoted = "\"" + std::string(key) + "\"";
  std::size_t pos = line.find(quoted);
  return pos == std::string_view::npos ? 0 : pos;
}

void reject_unknown(std::string_view line, const json& obj, const std::set<std::string>& allowed,
                    std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw MalformedRecord("unknown field \"" + key + "\" in " + std::string(where), key_offset(line, key));
    }
  }
}

template <typename T>
T field(std::string_view line, const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRecord(std::string("missing required field \"") + key + "\"", line.size());
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw MalformedRecord(std::string("bad value for \"") + key + "\": " + e.what(), key_offset(line, key));
  }
}

RecordSource parse_source(std::string_view line, const std::string& s) {
  if (s == "seed") return RecordSource::seed;
  if (s == "generated") return RecordSource::generated;
  if (s == "corrected") return RecordSource::corrected;
  throw MalformedRecord("unknown source \"" + s + "\"", key_offset(line, "source"));
}

}  // namespace

TheoremRecord decode_record(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(std::string("invalid JSON: ") + e.what(), e.byte == 0 ? 0 : e.byte - 1);
  }
  if (!obj.is_object()) throw MalformedRecord("record must be a JSON object", 0);
  reject_unknown(line, obj, {"name", "imports", "premises", "goal", "proof", "source", "provenance"}, "record");

  TheoremRecord r;
  r.name = field<std::string>(line, obj, "name");
  r.goal = field<std::string>(line, obj, "goal");
  std::vector<std::string> proof = field<std::vector<std::string>>(line, obj, "proof");
  try {
    r.proof = make_steps(proof);
  } catch (const std::invalid_argument& e) {
    throw MalformedRecord(e.what(), key_offset(line, "proof"));
  }
  if (obj.contains("imports")) r.imports = field<std::vector<std::string>>(line, obj, "imports");
  if (obj.contains("premises")) {
    const json& ps = obj.at("premises");
    if (!ps.is_array()) throw MalformedRecord("premises must be an array", key_offset(line, "premises"));
    for (const auto& p : ps) {
      if (!p.is_object()) throw MalformedRecord("premise must be an object", key_offset(line, "premises"));
      reject_unknown(line, p, {"name", "type"}, "premise");
      r.premises.push_back(Premise{field<std::string>(line, p, "name"), field<std::string>(line, p, "type")});
    }
  }
  if (obj.contains("source")) r.source = parse_source(line, field<std::string>(line, obj, "source"));
  if (obj.contains("provenance")) {
    const json& pv = obj.at("provenance");
    if (!pv.is_object()) throw MalformedRecord("provenance must be an object", key_offset(line, "provenance"));
    reject_unknown(line, pv, {"root_name", "path_id", "prediction_steps"}, "provenance");
    r.provenance = Provenance{field<std::string>(line, pv, "root_name"), field<std::string>(line, pv, "path_id"),
                              field<std::size_t>(line, pv, "prediction_steps")};
  }
  try {
    r.check_invariants();
  } catch (const std::invalid_argument& e) {
    throw MalformedRecord(e.what(), 0);
  }
  return r;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<TheoremRecord> read_records(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::vector<TheoremRecord> out;
  std::set<std::string> names;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(decode_record(line));
    } catch (const MalformedRecord& e) {
      throw MalformedRecord(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), e.byte_offset());
    }
    if (!names.insert(out.back().name).second) {
      throw MalformedRecord(path.string() + ":" + std::to_string(line_no) + ": duplicate record name " + out.back().name,
                            0);
    }
  }
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<TheoremRecord>& records) {
  std::string body;
  for (const auto& r : records) {
    body += encode_record(r);
    body += '\n';
  }
  write_file_atomic(path, body);
}

std::vector<StateTacticPair> read_pairs(const std::filesystem::path& path) {
  std::vector<StateTacticPair> out;
  for (const auto& line : split_lines(read_file(path))) {
    if (trim(line).empty()) continue;
    out.push_back(pair_from_json(json::parse(line)));
  }
  return out;
}

void write_pairs(const std::filesystem::path& path, const std::vector<StateTacticPair>& pairs) {
  std::string body;
  for (const auto& p : pairs) {
    body += pair_to_json(p).dump();
    body += '\n';
  }
  write_file_atomic(path, body);
}

std::string_view to_string(StatsCategory category) {
  switch (category) {
    case StatsCategory::deduplicated: return "deduplicated";
    case StatsCategory::correct: return "correct";
    case StatsCategory::corrected: return "corrected";
    case StatsCategory::fresh: return "new";
  }
  return "new";
}

namespace {

constexpr StatsCategory kCategories[] = {StatsCategory::deduplicated, StatsCategory::correct,
                                         StatsCategory::corrected, StatsCategory::fresh};

std::size_t histogram_total(const StepHistogram& h) {
  std::size_t total = 0;
  for (const auto& [_, n] : h) total += n;
  return total;
}

}  // namespace

DatasetStats::DatasetStats(std::size_t n_candidate, std::size_t n_deduplicated, std::size_t n_correct,
                           std::size_t n_corrected, std::size_t n_new,
                           std::map<StatsCategory, StepHistogram> histograms)
    : n_candidate_(n_candidate),
      n_deduplicated_(n_deduplicated),
      n_correct_(n_correct),
      n_corrected_(n_corrected),
      histograms_(std::move(histograms)) {
  if (n_new != n_correct + n_corrected) {
    throw std::invalid_argument("stats identity violated: n_new " + std::to_string(n_new) + " != n_correct " +
                                std::to_string(n_correct) + " + n_corrected " + std::to_string(n_corrected));
  }
  const std::map<StatsCategory, std::size_t> expected{{StatsCategory::deduplicated, n_deduplicated},
                                                      {StatsCategory::correct, n_correct},
                                                      {StatsCategory::corrected, n_corrected},
                                                      {StatsCategory::fresh, n_new}};
  for (const auto& [category, hist] : histograms_) {
    if (histogram_total(hist) != expected.at(category)) {
      throw std::invalid_argument("histogram total for " + std::string(to_string(category)) +
                                  " does not match its counter");
    }
  }
}

const StepHistogram& DatasetStats::histogram(StatsCategory category) const {
  static const StepHistogram empty;
  auto it = histograms_.find(category);
  return it == histograms_.end() ? empty : it->second;
}

void DatasetStats::bump(StatsCategory category, std::size_t steps) { ++histograms_[category][steps]; }

void DatasetStats::add_deduplicated(std::size_t steps) {
  ++n_deduplicated_;
  bump(StatsCategory::deduplicated, steps);
}

void DatasetStats::add_correct(std::size_t steps) {
  ++n_correct_;
  bump(StatsCategory::correct, steps);
  bump(StatsCategory::fresh, steps);
}

void DatasetStats::add_corrected(std::size_t steps) {
  ++n_corrected_;
  bump(StatsCategory::corrected, steps);
  bump(StatsCategory::fresh, steps);
}

DatasetStats& DatasetStats::operator+=(const DatasetStats& other) {
  n_candidate_ += other.n_candidate_;
  n_deduplicated_ += other.n_deduplicated_;
  n_correct_ += other.n_correct_;
  n_corrected_ += other.n_corrected_;
  for (const auto& [category, hist] : other.histograms_) {
    for (const auto& [steps, n] : hist) histograms_[category][steps] += n;
  }
  return *this;
}

json DatasetStats::to_json() const {
  json hists = json::object();
  for (StatsCategory c : kCategories) {
    json h = json::object();
    for (const auto& [steps, n] : histogram(c)) h[std::to_string(steps)] = n;
    hists[std::string(to_string(c))] = h;
  }
  return json{{"candidate", n_candidate_}, {"deduplicated", n_deduplicated_}, {"correct", n_correct_},
              {"corrected", n_corrected_}, {"new", n_new()},                  {"step_histograms", hists}};
}

DatasetStats DatasetStats::from_json(const json& j) {
  std::map<StatsCategory, StepHistogram> hists;
  if (j.contains("step_histograms")) {
    for (StatsCategory c : kCategories) {
      auto key = std::string(to_string(c));
      if (!j.at("step_histograms").contains(key)) continue;
      StepHistogram h;
      for (const auto& [steps, n] : j.at("step_histograms").at(key).items()) {
        h[static_cast<std::size_t>(std::stoull(steps))] = n.get<std::size_t>();
      }
      if (!h.empty()) hists[c] = std::move(h);
    }
  }
  return DatasetStats(j.at("candidate").get<std::size_t>(), j.at("deduplicated").get<std::size_t>(),
                      j.at("correct").get<std::size_t>(), j.at("corrected").get<std::size_t>(),
                      j.at("new").get<std::size_t>(), std::move(hists));
}

}  // namespace atgforge
