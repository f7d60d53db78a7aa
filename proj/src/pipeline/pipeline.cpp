#include "atgforge/pipeline/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "atgforge/core/pool.hpp"
#include "atgforge/synth/synth.hpp"

namespace atgforge {

namespace fs = std::filesystem;

json summary_to_json(const GenerationSummary& s) {
  return json{{"p3s", s.p3s},
              {"proofs_found", s.proofs_found},
              {"candidate_paths", s.candidate_paths},
              {"non_transformable", s.non_transformable}};
}

GenerationSummary summary_from_json(const json& j) {
  GenerationSummary s;
  s.p3s = j.at("p3s").get<std::size_t>();
  s.proofs_found = j.at("proofs_found").get<std::size_t>();
  s.candidate_paths = j.at("candidate_paths").get<std::size_t>();
  s.non_transformable = j.at("non_transformable").get<std::size_t>();
  return s;
}

GenerationBatch generate_candidates(const std::vector<P3>& p3s, const std::map<std::string, TheoremRecord>& roots,
                                    Suggester& suggester, const ProverFactory& prover_factory,
                                    const Guidance* guidance, const SearchLimits& limits, std::size_t workers,
                                    int iteration) {
  std::size_t pool = std::max<std::size_t>(1, std::min(workers, p3s.size()));
  std::vector<std::unique_ptr<Prover>> provers;
  for (std::size_t w = 0; w < pool; ++w) provers.push_back(prover_factory());

  std::vector<SearchResult> results(p3s.size());
  parallel_for(p3s.size(), pool, [&](std::size_t w, std::size_t i) {
    results[i] = run_search(p3s[i], suggester, *provers[w], guidance, limits);
  });

  GenerationBatch batch;
  batch.summary.p3s = p3s.size();
  const std::string suffix = "_i" + std::to_string(iteration);
  for (std::size_t i = 0; i < p3s.size(); ++i) {
    const SearchResult& r = results[i];
    batch.summary.proofs_found += r.proofs.size();
    batch.summary.candidate_paths += r.candidate_paths.size();
    auto root = roots.find(p3s[i].root.name);
    if (root == roots.end()) throw std::logic_error("P3 " + p3s[i].path_id + " has no seed theorem");
    SynthesisBatch s = synthesize(root->second, r.candidate_paths);
    batch.summary.non_transformable += s.non_transformable;
    for (auto& c : s.candidates) {
      c.name += suffix;
      batch.candidates.push_back(std::move(c));
    }
    batch.paths.insert(batch.paths.end(), r.candidate_paths.begin(), r.candidate_paths.end());
  }
  return batch;
}

std::vector<StateTacticPair> record_pairs(const std::vector<TheoremRecord>& records, Prover& prover) {
  std::vector<StateTacticPair> out;
  for (const auto& r : records) {
    auto pairs = extract_state_tactic_pairs(build_proof_tree(r, prover));
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  return out;
}

int generation_passes(int n) { return std::max(n, 1); }

namespace {

const std::vector<std::string> kStages = {"refresh", "train", "generate", "validate", "merge"};

std::string stage_key(int iteration, const std::string& stage) { return std::to_string(iteration) + "/" + stage; }

/// Completed stages, persisted after every stage so a restart skips them.
class StageLedger {
 public:
  StageLedger(fs::path path, std::string digest) : path_(std::move(path)), digest_(std::move(digest)) {
    if (!fs::exists(path_)) return;
    json j = json::parse(read_file(path_));
    if (j.at("config_digest").get<std::string>() != digest_) {
      throw ConfigError("output directory holds a run with a different configuration: " + path_.parent_path().string());
    }
    for (const auto& s : j.at("completed")) done_.push_back(s.get<std::string>());
  }

  bool done(const std::string& key) const { return std::find(done_.begin(), done_.end(), key) != done_.end(); }

  void mark(const std::string& key) {
    done_.push_back(key);
    write_file_atomic(path_, json{{"config_digest", digest_}, {"completed", done_}}.dump(2) + "\n");
  }

 private:
  fs::path path_;
  std::string digest_;
  std::vector<std::string> done_;
};

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) { return json::parse(read_file(path)); }

void write_rejects(const fs::path& path, const std::vector<Reject>& rejects) {
  std::string body;
  for (const auto& r : rejects) body += reject_to_json(r).dump() + "\n";
  write_file_atomic(path, body);
}

std::vector<Reject> read_rejects(const fs::path& path) {
  std::vector<Reject> out;
  std::istringstream in(read_file(path));
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Reject r{decode_record(j.at("record").dump()), Verdict::Unrepairable, j.at("messages").get<std::vector<std::string>>()};
    std::string v = j.at("verdict").get<std::string>();
    for (Verdict cand : {Verdict::Correct, Verdict::Incomplete, Verdict::TypeError, Verdict::LogicalError,
                         Verdict::RedundantSteps, Verdict::Unrepairable}) {
      if (to_string(cand) == v) r.verdict = cand;
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_paths(const fs::path& path, const std::vector<CandidatePath>& paths) {
  std::string body;
  for (const auto& p : paths) body += candidate_path_to_json(p).dump() + "\n";
  write_file_atomic(path, body);
}

void save_guidance(const fs::path& path, const Guidance& g) {
  fs::path tmp = path;
  tmp += ".tmp";
  g.snapshot().save(tmp);
  fs::rename(tmp, path);
}

}  // namespace

IterationLedger run_atg4ci(const PipelineConfig& config, const RunOptions& options) {
  config.check();
  std::optional<std::string> stop_after = options.stop_after;
  if (!stop_after) {
    if (const char* env = std::getenv("ATGFORGE_STOP_AFTER")) stop_after = env;
  }
  auto maybe_stop = [&](const std::string& key) {
    if (stop_after && *stop_after == key) throw StopRequested("stopped after " + key);
  };

  std::vector<TheoremRecord> seeds;
  try {
    seeds = read_records(config.seeds);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read seed set " + config.seeds.string() + ": " + e.what());
  }
  if (seeds.empty()) throw ConfigError("seed set " + config.seeds.string() + " is empty");
  ProverFactory factory = make_prover_factory(config);

  const fs::path out = config.out_dir;
  fs::create_directories(out);
  StageLedger stages(out / "ledger.json", config_digest(config));
  write_json(out / "config.json", config_to_json(config));

  IterationLedger ledger;
  std::map<std::string, TheoremRecord> roots;
  for (const auto& s : seeds) roots.emplace(s.name, s);
  std::unique_ptr<Prover> prover = factory();

  // P3s <- construct(L_t*)
  std::vector<P3> p3s;
  if (stages.done("extract")) {
    p3s = read_p3s(out / "p3s.jsonl");
    ledger.seed_pairs = read_pairs(out / "seed_pairs.jsonl");
    ledger.resumed_stages.push_back("extract");
  } else {
    Extraction ex = extract_all(seeds, *prover);
    p3s = std::move(ex.p3s);
    ledger.seed_pairs = std::move(ex.pairs);
    write_p3s(out / "p3s.jsonl", p3s);
    write_pairs(out / "seed_pairs.jsonl", ledger.seed_pairs);
    write_json(out / "skipped_seeds.json", ex.skipped);
    stages.mark("extract");
    maybe_stop("extract");
  }
  ledger.p3_count = p3s.size();

  SuggesterSet suggesters = make_suggester(config);
  std::unique_ptr<Guidance> guidance;
  if (config.guidance) guidance = std::make_unique<Guidance>(GuidanceModel(stage_seed(config.seed, 0, "guidance")));

  std::vector<StateTacticPair> previous_pairs = ledger.seed_pairs;  // G_0 <- L_t*
  const int passes = generation_passes(config.max_iterations);
  for (int i = 1; i <= passes; ++i) {
    const fs::path dir = out / ("iter_" + std::to_string(i));
    fs::create_directories(dir);
    IterationRecord rec;
    rec.iteration = i;

    // refresh on G_{i-1}*; a resumed refresh only rebuilds local counts
    if (stages.done(stage_key(i, "refresh"))) {
      suggesters.rules->refresh(previous_pairs);
      ledger.resumed_stages.push_back(stage_key(i, "refresh"));
    } else {
      suggesters.active->refresh(previous_pairs);
      write_json(dir / "suggester.json", suggesters.rules->to_json());
      stages.mark(stage_key(i, "refresh"));
      maybe_stop(stage_key(i, "refresh"));
    }

    if (guidance) {
      if (stages.done(stage_key(i, "train"))) {
        guidance = std::make_unique<Guidance>(GuidanceModel::load(dir / "guidance.bin"));
        ledger.resumed_stages.push_back(stage_key(i, "train"));
      } else {
        train_guidance(*guidance, p3s, *suggesters.active, *prover, config.search);
        save_guidance(dir / "guidance.bin", *guidance);
        stages.mark(stage_key(i, "train"));
        maybe_stop(stage_key(i, "train"));
      }
    }

    if (stages.done(stage_key(i, "generate"))) {
      rec.generated = read_records(dir / "G.jsonl");
      rec.summary = summary_from_json(read_json(dir / "generation.json"));
      ledger.resumed_stages.push_back(stage_key(i, "generate"));
    } else {
      GenerationBatch batch = generate_candidates(p3s, roots, *suggesters.active, factory, guidance.get(),
                                                  config.search, config.workers, i);
      rec.generated = std::move(batch.candidates);
      rec.summary = batch.summary;
      write_paths(dir / "candidate_paths.jsonl", batch.paths);
      write_records(dir / "G.jsonl", rec.generated);
      write_json(dir / "generation.json", summary_to_json(rec.summary));
      stages.mark(stage_key(i, "generate"));
      maybe_stop(stage_key(i, "generate"));
    }

    std::vector<StateTacticPair> pairs;
    if (stages.done(stage_key(i, "validate"))) {
      rec.validated = read_records(dir / "G_star.jsonl");
      rec.rejects = read_rejects(dir / "rejects.jsonl");
      rec.stats = DatasetStats::from_json(read_json(dir / "stats.json"));
      pairs = read_pairs(dir / "pairs.jsonl");
      ledger.resumed_stages.push_back(stage_key(i, "validate"));
    } else {
      ValidateOptions vo;
      vo.budget = config.repair;
      vo.workers = config.workers;
      vo.roots = &roots;
      ValidationReport report = validate_all(rec.generated, factory, *suggesters.active, vo);
      rec.validated = std::move(report.dataset);
      rec.rejects = std::move(report.rejects);
      rec.stats = report.stats;
      pairs = record_pairs(rec.validated, *prover);
      write_records(dir / "G_star.jsonl", rec.validated);
      write_rejects(dir / "rejects.jsonl", rec.rejects);
      write_json(dir / "stats.json", rec.stats.to_json());
      write_pairs(dir / "pairs.jsonl", pairs);
      stages.mark(stage_key(i, "validate"));
      maybe_stop(stage_key(i, "validate"));
    }

    // E* <- dedup(E* + G_i*)
    if (stages.done(stage_key(i, "merge"))) {
      ledger.e_star = read_records(dir / "E_star.jsonl");
      ledger.resumed_stages.push_back(stage_key(i, "merge"));
    } else {
      std::vector<TheoremRecord> merged = ledger.e_star;
      merged.insert(merged.end(), rec.validated.begin(), rec.validated.end());
      ledger.e_star = dedup(merged).unique;
      write_records(dir / "E_star.jsonl", ledger.e_star);
      stages.mark(stage_key(i, "merge"));
      maybe_stop(stage_key(i, "merge"));
    }
    rec.e_star_size = ledger.e_star.size();
    spdlog::info("iteration {}: {} candidates, {} new, |E*| = {}", i, rec.stats.n_candidate(), rec.stats.n_new(),
                 rec.e_star_size);

    ledger.pairs.insert(ledger.pairs.end(), pairs.begin(), pairs.end());
    previous_pairs = std::move(pairs);
    ledger.iterations.push_back(std::move(rec));
  }

  write_records(out / "E_star.jsonl", ledger.e_star);
  write_json(out / "stats.json", compute_stats(ledger).to_json());
  export_finetune_data(ledger, out / "finetune.jsonl");
  return ledger;
}

json StatsReport::to_json() const {
  json its = json::array();
  for (const auto& [i, s] : iterations) {
    json j = s.to_json();
    j["iteration"] = i;
    its.push_back(j);
  }
  return json{{"iterations", its}, {"total", total.to_json()}};
}

StatsReport StatsReport::from_json(const json& j) {
  StatsReport r;
  for (const auto& it : j.at("iterations")) {
    DatasetStats s = DatasetStats::from_json(it);
    r.iterations.emplace_back(it.at("iteration").get<int>(), s);
    r.total += s;
  }
  if (j.contains("total")) {
    DatasetStats stated = DatasetStats::from_json(j.at("total"));
    if (!(stated == r.total)) throw std::invalid_argument("stats total does not equal the sum of its iterations");
  }
  return r;
}

std::string StatsReport::table() const {
  std::ostringstream out;
  auto row = [&](const std::string& label, auto get) {
    out << label;
    for (std::size_t pad = label.size(); pad < 16; ++pad) out << ' ';
    for (const auto& [i, s] : iterations) out << '\t' << get(s);
    out << '\t' << get(total) << '\n';
  };
  out << "iteration       ";
  for (const auto& [i, s] : iterations) out << '\t' << i;
  out << "\ttotal\n";
  row("# Candidate", [](const DatasetStats& s) { return s.n_candidate(); });
  row("# Deduplicated", [](const DatasetStats& s) { return s.n_deduplicated(); });
  row("# Correct", [](const DatasetStats& s) { return s.n_correct(); });
  row("# Corrected", [](const DatasetStats& s) { return s.n_corrected(); });
  row("Subtotal", [](const DatasetStats& s) { return s.n_new(); });
  return out.str();
}

StatsReport compute_stats(const IterationLedger& ledger) {
  StatsReport r;
  for (const auto& it : ledger.iterations) {
    r.iterations.emplace_back(it.iteration, it.stats);
    r.total += it.stats;
  }
  return r;
}

std::vector<FinetuneRecord> export_finetune_data(const IterationLedger& ledger, const fs::path& path) {
  std::vector<StateTacticPair> all = ledger.seed_pairs;
  all.insert(all.end(), ledger.pairs.begin(), ledger.pairs.end());
  auto records = finetune_records(all);
  write_finetune_records(path, records);
  return records;
}

}  // namespace atgforge
