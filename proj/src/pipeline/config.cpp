#include "atgforge/pipeline/config.hpp"

#include <fstream>
#include <set>

#include "atgforge/core/text.hpp"
#include "atgforge/leanrepl/client.hpp"
#include "atgforge/prover/mock_prover.hpp"

namespace atgforge {

namespace {

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError("unknown config key " + where + "." + k);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void read_path(const json& j, const char* key, std::filesystem::path& out, const std::string& where) {
  std::string s = out.string();
  read(j, key, s, where);
  out = s;
}

}  // namespace

void PipelineConfig::check() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (max_iterations < 0) fail("max_iterations must be >= 0");
  if (prover != "mock" && prover != "lean") fail("prover must be mock or lean");
  if (prover == "lean" && lean.repl_path.empty()) fail("lean.repl_path is required for the lean prover");
  if (suggest.t != 4 && suggest.t != 8 && suggest.t != 16) fail("suggest.t must be 4, 8 or 16");
  if (suggest.source != "rules" && suggest.source != "remote") fail("suggest.source must be rules or remote");
  if (suggest.source == "remote" && suggest.remote.url.empty()) fail("suggest.remote.url is required");
  if (search.simulations_per_decision <= 0 || search.max_depth <= 0 || search.events_per_iteration <= 0 ||
      search.train_iterations < 0 || search.time_budget_secs <= 0 || search.c_puct < 0 || search.learning_rate <= 0) {
    fail("search limits must be positive");
  }
  if (search.blend < 0 || search.blend > 1) fail("search.blend must lie in [0, 1]");
  if (repair.simulations <= 0 || repair.candidates <= 0 || repair.max_depth <= 0 || repair.exploration < 0) {
    fail("repair budget must be positive");
  }
  if (workers == 0) fail("workers must be positive");
  if (eval.width == 0 || eval.max_expansions == 0 || eval.wall_time_secs < 0 || eval.max_depth <= 0) {
    fail("eval settings must be positive");
  }
  if (out_dir.empty()) fail("paths.out_dir is required");
  if (!seeds.empty() && std::filesystem::weakly_canonical(seeds) == std::filesystem::weakly_canonical(out_dir)) {
    fail("paths.seeds and paths.out_dir must differ");
  }
  if (!eval.testset.empty() && eval.testset == seeds) fail("eval.testset and paths.seeds must differ");
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  only_keys(j, {"seed", "max_iterations", "prover", "lean", "suggest", "search", "guidance", "repair", "pipeline",
                "paths", "eval"},
            "config");
  read(j, "seed", c.seed, "config");
  read(j, "max_iterations", c.max_iterations, "config");
  read(j, "prover", c.prover, "config");
  read(j, "guidance", c.guidance, "config");
  if (j.contains("lean")) {
    const json& l = j.at("lean");
    only_keys(l, {"repl_path", "repl_args", "timeout_secs", "header"}, "lean");
    read(l, "repl_path", c.lean.repl_path, "lean");
    read(l, "repl_args", c.lean.repl_args, "lean");
    read(l, "timeout_secs", c.lean.timeout_secs, "lean");
    read(l, "header", c.lean.header, "lean");
  }
  if (j.contains("suggest")) {
    const json& s = j.at("suggest");
    only_keys(s, {"t", "source", "remote"}, "suggest");
    read(s, "t", c.suggest.t, "suggest");
    read(s, "source", c.suggest.source, "suggest");
    if (s.contains("remote")) {
      const json& r = s.at("remote");
      only_keys(r, {"url", "max_tokens", "max_inflight", "timeout_secs", "export_path", "refresh_hook"}, "suggest.remote");
      read(r, "url", c.suggest.remote.url, "suggest.remote");
      read(r, "max_tokens", c.suggest.remote.max_tokens, "suggest.remote");
      read(r, "max_inflight", c.suggest.remote.max_inflight, "suggest.remote");
      read(r, "timeout_secs", c.suggest.remote.timeout_secs, "suggest.remote");
      read_path(r, "export_path", c.suggest.remote.export_path, "suggest.remote");
      read(r, "refresh_hook", c.suggest.remote.refresh_hook, "suggest.remote");
    }
  }
  if (j.contains("search")) {
    const json& s = j.at("search");
    only_keys(s, {"c_puct", "simulations_per_decision", "time_budget_secs", "events_per_iteration", "train_iterations",
                  "max_depth", "blend", "learning_rate"},
              "search");
    read(s, "c_puct", c.search.c_puct, "search");
    read(s, "simulations_per_decision", c.search.simulations_per_decision, "search");
    read(s, "time_budget_secs", c.search.time_budget_secs, "search");
    read(s, "events_per_iteration", c.search.events_per_iteration, "search");
    read(s, "train_iterations", c.search.train_iterations, "search");
    read(s, "max_depth", c.search.max_depth, "search");
    read(s, "blend", c.search.blend, "search");
    read(s, "learning_rate", c.search.learning_rate, "search");
  }
  if (j.contains("repair")) {
    const json& r = j.at("repair");
    only_keys(r, {"simulations", "candidates", "exploration", "max_depth"}, "repair");
    read(r, "simulations", c.repair.simulations, "repair");
    read(r, "candidates", c.repair.candidates, "repair");
    read(r, "exploration", c.repair.exploration, "repair");
    read(r, "max_depth", c.repair.max_depth, "repair");
  }
  if (j.contains("pipeline")) {
    only_keys(j.at("pipeline"), {"workers"}, "pipeline");
    read(j.at("pipeline"), "workers", c.workers, "pipeline");
  }
  if (j.contains("paths")) {
    only_keys(j.at("paths"), {"seeds", "out_dir"}, "paths");
    read_path(j.at("paths"), "seeds", c.seeds, "paths");
    read_path(j.at("paths"), "out_dir", c.out_dir, "paths");
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    only_keys(e, {"testset", "wall_time_secs", "width", "max_expansions", "max_depth"}, "eval");
    read_path(e, "testset", c.eval.testset, "eval");
    read(e, "wall_time_secs", c.eval.wall_time_secs, "eval");
    read(e, "width", c.eval.width, "eval");
    read(e, "max_expansions", c.eval.max_expansions, "eval");
    read(e, "max_depth", c.eval.max_depth, "eval");
  }
  c.search.max_candidates = static_cast<int>(c.suggest.t);
  c.check();
  return c;
}

json config_to_json(const PipelineConfig& c) {
  return json{
      {"seed", c.seed},
      {"max_iterations", c.max_iterations},
      {"prover", c.prover},
      {"lean",
       {{"repl_path", c.lean.repl_path},
        {"repl_args", c.lean.repl_args},
        {"timeout_secs", c.lean.timeout_secs},
        {"header", c.lean.header}}},
      {"suggest",
       {{"t", c.suggest.t},
        {"source", c.suggest.source},
        {"remote",
         {{"url", c.suggest.remote.url},
          {"max_tokens", c.suggest.remote.max_tokens},
          {"max_inflight", c.suggest.remote.max_inflight},
          {"timeout_secs", c.suggest.remote.timeout_secs},
          {"export_path", c.suggest.remote.export_path.string()},
          {"refresh_hook", c.suggest.remote.refresh_hook}}}}},
      {"search",
       {{"c_puct", c.search.c_puct},
        {"simulations_per_decision", c.search.simulations_per_decision},
        {"time_budget_secs", c.search.time_budget_secs},
        {"events_per_iteration", c.search.events_per_iteration},
        {"train_iterations", c.search.train_iterations},
        {"max_depth", c.search.max_depth},
        {"blend", c.search.blend},
        {"learning_rate", c.search.learning_rate}}},
      {"guidance", c.guidance},
      {"repair",
       {{"simulations", c.repair.simulations},
        {"candidates", c.repair.candidates},
        {"exploration", c.repair.exploration},
        {"max_depth", c.repair.max_depth}}},
      {"pipeline", {{"workers", c.workers}}},
      {"paths", {{"seeds", c.seeds.string()}, {"out_dir", c.out_dir.string()}}},
      {"eval",
       {{"testset", c.eval.testset.string()},
        {"wall_time_secs", c.eval.wall_time_secs},
        {"width", c.eval.width},
        {"max_expansions", c.eval.max_expansions},
        {"max_depth", c.eval.max_depth}}},
  };
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_digest(const PipelineConfig& c) {
  json j = config_to_json(c);
  j.erase("pipeline");
  j["paths"].erase("out_dir");
  j.erase("eval");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

std::uint64_t stage_seed(std::uint64_t seed, int iteration, std::string_view stage) {
  return fnv1a(std::to_string(seed) + "/" + std::to_string(iteration) + "/" + std::string(stage));
}

ProverFactory make_prover_factory(const PipelineConfig& c) {
  if (c.prover == "mock") return mock::mock_factory();
  lean::ReplConfig rc;
  rc.command.push_back(c.lean.repl_path);
  rc.command.insert(rc.command.end(), c.lean.repl_args.begin(), c.lean.repl_args.end());
  if (c.lean.timeout_secs > 0) rc.timeout = std::chrono::milliseconds(static_cast<long long>(c.lean.timeout_secs * 1000));
  std::string header = c.lean.header;
  {
    lean::ReplClient probe(rc);
    try {
      probe.run_import(header);
    } catch (const lean::ImportFailed& e) {
      throw BackendUnavailable(std::string("Lean REPL cannot load the header: ") + e.what());
    } catch (const lean::ReplCrashed& e) {
      throw BackendUnavailable(e.what());
    }
  }
  return [rc, header] { return std::make_unique<lean::LeanProver>(std::make_shared<lean::ReplClient>(rc), header); };
}

SuggesterSet make_suggester(const PipelineConfig& c) {
  auto rules = std::make_shared<RuleFrequencySuggester>();
  if (c.suggest.source == "rules") return {rules, rules};
  return {std::make_shared<FallbackSuggester>(std::make_shared<RemoteSuggester>(c.suggest.remote), rules), rules};
}

}  // namespace atgforge
