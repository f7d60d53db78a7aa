#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "atgforge/extract/extract.hpp"
#include "atgforge/pipeline/config.hpp"
#include "atgforge/pipeline/evaluate.hpp"
#include "atgforge/pipeline/pipeline.hpp"
#include "atgforge/synth/synth.hpp"

using namespace atgforge;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kBackendUnavailable = 3;
constexpr int kStopped = 75;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string prover;
  std::string out_dir;
  std::string seeds;
  bool verbose = false;
};

PipelineConfig resolve(const Globals& g) {
  PipelineConfig c = g.config_path.empty() ? config_from_json(json::object()) : load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (!g.prover.empty()) c.prover = g.prover;
  if (!g.out_dir.empty()) c.out_dir = g.out_dir;
  if (!g.seeds.empty()) c.seeds = g.seeds;
  c.check();
  return c;
}

std::vector<TheoremRecord> load_seeds(const PipelineConfig& c) {
  if (c.seeds.empty()) throw ConfigError("a seed set is required (--seeds or paths.seeds)");
  try {
    return read_records(c.seeds);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read seed set " + c.seeds.string() + ": " + e.what());
  }
}

void print_json(const json& j) { std::cout << j.dump(2) << std::endl; }

int cmd_extract(const PipelineConfig& c) {
  auto seeds = load_seeds(c);
  auto prover = make_prover_factory(c)();
  Extraction ex = extract_all(seeds, *prover);
  write_p3s(c.out_dir / "p3s.jsonl", ex.p3s);
  write_pairs(c.out_dir / "seed_pairs.jsonl", ex.pairs);
  print_json({{"seeds", seeds.size()}, {"p3s", ex.p3s.size()}, {"pairs", ex.pairs.size()}, {"skipped", ex.skipped}});
  return kOk;
}

int cmd_generate(const PipelineConfig& c) {
  auto seeds = load_seeds(c);
  ProverFactory factory = make_prover_factory(c);
  auto prover = factory();
  Extraction ex = extract_all(seeds, *prover);
  std::map<std::string, TheoremRecord> roots;
  for (const auto& s : seeds) roots.emplace(s.name, s);
  SuggesterSet sugg = make_suggester(c);
  sugg.active->refresh(ex.pairs);
  std::unique_ptr<Guidance> guidance;
  if (c.guidance) {
    guidance = std::make_unique<Guidance>(GuidanceModel(stage_seed(c.seed, 0, "guidance")));
    train_guidance(*guidance, ex.p3s, *sugg.active, *prover, c.search);
  }
  GenerationBatch batch = generate_candidates(ex.p3s, roots, *sugg.active, factory, guidance.get(), c.search, c.workers, 1);
  write_records(c.out_dir / "candidates.jsonl", batch.candidates);
  std::string body;
  for (const auto& p : batch.paths) body += candidate_path_to_json(p).dump() + "\n";
  write_file_atomic(c.out_dir / "candidate_paths.jsonl", body);
  json summary = summary_to_json(batch.summary);
  summary["candidates"] = batch.candidates.size();
  print_json(summary);
  return kOk;
}

int cmd_validate(const PipelineConfig& c, const std::string& in, const std::string& out, const std::string& rejects_path,
                 const std::string& stats_path) {
  std::vector<TheoremRecord> records;
  try {
    records = read_records(in);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read " + in + ": " + e.what());
  }
  ProverFactory factory = make_prover_factory(c);
  SuggesterSet sugg = make_suggester(c);
  std::map<std::string, TheoremRecord> roots;
  if (!c.seeds.empty()) {
    auto seeds = load_seeds(c);
    for (const auto& s : seeds) roots.emplace(s.name, s);
    auto prover = factory();
    sugg.active->refresh(extract_all(seeds, *prover).pairs);
  }
  ValidateOptions vo;
  vo.budget = c.repair;
  vo.workers = c.workers;
  vo.roots = &roots;
  ValidationReport report = validate_all(records, factory, *sugg.active, vo);
  write_records(out, report.dataset);
  if (!rejects_path.empty()) {
    std::string body;
    for (const auto& r : report.rejects) body += reject_to_json(r).dump() + "\n";
    write_file_atomic(rejects_path, body);
  }
  if (!stats_path.empty()) write_file_atomic(stats_path, report.stats.to_json().dump(2) + "\n");
  print_json(report.stats.to_json());
  return kOk;
}

int cmd_evaluate(PipelineConfig c, const std::string& testset, std::optional<std::size_t> width,
                 std::optional<double> wall_time, const std::string& out) {
  if (!testset.empty()) c.eval.testset = testset;
  if (width) c.eval.width = *width;
  if (wall_time) c.eval.wall_time_secs = *wall_time;
  c.check();
  if (c.eval.testset.empty()) throw ConfigError("a test set is required (--testset or eval.testset)");
  std::vector<TheoremRecord> tests;
  try {
    tests = read_records(c.eval.testset);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read test set: " + std::string(e.what()));
  }
  auto prover = make_prover_factory(c)();
  SuggesterSet sugg = make_suggester(c);
  if (!c.seeds.empty()) sugg.active->refresh(extract_all(load_seeds(c), *prover).pairs);
  EvalReport report = evaluate_pass1(tests, *prover, *sugg.active, c.eval);
  if (!out.empty()) write_file_atomic(out, report.to_json().dump(2) + "\n");
  print_json({{"pass@1", report.rate}, {"width", report.width}, {"theorems", tests.size()}});
  return kOk;
}

int cmd_stats(const std::string& in) {
  fs::path p = in;
  if (fs::is_directory(p)) p /= "stats.json";
  StatsReport r;
  try {
    r = StatsReport::from_json(json::parse(read_file(p)));
  } catch (const std::exception& e) {
    throw ConfigError("cannot read stats from " + p.string() + ": " + e.what());
  }
  std::cout << r.table();
  return kOk;
}

int cmd_run(const PipelineConfig& c) {
  IterationLedger ledger = run_atg4ci(c);
  std::cout << compute_stats(ledger).table();
  std::cout << "E*: " << ledger.e_star.size() << " theorems in " << (c.out_dir / "E_star.jsonl").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Theorem generation by proof-path exploration"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Configuration file (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--prover", g.prover, "Prover backend")->check(CLI::IsMember({"mock", "lean"}));
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_flag("-v,--verbose", g.verbose, "Log progress");

  auto* extract = app.add_subcommand("extract", "Replay seeds, write P3s and state-tactic pairs");
  extract->add_option("--seeds", g.seeds, "Seed theorems (JSONL)");

  auto* generate = app.add_subcommand("generate", "One search and synthesis pass over the seed P3s");
  generate->add_option("--seeds", g.seeds, "Seed theorems (JSONL)");

  std::string in, out, rejects, stats_out;
  auto* validate = app.add_subcommand("validate", "Deduplicate, classify and repair candidate theorems");
  validate->add_option("--in", in, "Candidate theorems (JSONL)")->required();
  validate->add_option("--out", out, "Accepted dataset (JSONL)")->required();
  validate->add_option("--rejects", rejects, "Rejected records (JSONL)");
  validate->add_option("--stats", stats_out, "Statistics (JSON)");
  validate->add_option("--seeds", g.seeds, "Root theorems used for type repair and suggester warm-up");

  std::string testset, eval_out;
  std::optional<std::size_t> width;
  std::optional<double> wall_time;
  auto* evaluate = app.add_subcommand("evaluate", "Pass@1 with best-first search");
  evaluate->add_option("--testset", testset, "Test theorems (JSONL)");
  evaluate->add_option("--width", width, "Candidates per expansion")->check(CLI::PositiveNumber);
  evaluate->add_option("--wall-time", wall_time, "Seconds per theorem")->check(CLI::NonNegativeNumber);
  evaluate->add_option("--seeds", g.seeds, "Seed theorems used to warm the suggester");
  evaluate->add_option("--out", eval_out, "Per-theorem report (JSON)");

  std::string stats_in;
  auto* stats = app.add_subcommand("stats", "Print the statistics table of a run");
  stats->add_option("--in", stats_in, "Run directory or stats.json")->required();

  auto* run = app.add_subcommand("run", "The full generation loop");
  run->add_option("--seeds", g.seeds, "Seed theorems (JSONL)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  spdlog::set_level(g.verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (*stats) return cmd_stats(stats_in);
    PipelineConfig c = resolve(g);
    if (*extract) return cmd_extract(c);
    if (*generate) return cmd_generate(c);
    if (*validate) return cmd_validate(c, in, out, rejects, stats_out);
    if (*evaluate) return cmd_evaluate(c, testset, width, wall_time, eval_out);
    if (*run) return cmd_run(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BackendUnavailable& e) {
    std::cerr << "backend unavailable: " << e.what() << "\n";
    return kBackendUnavailable;
  } catch (const StopRequested& e) {
    std::cerr << e.what() << "\n";
    return kStopped;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
