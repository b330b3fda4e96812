// Copyright 2026 The DeceptForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// deceptforge: command-line front end.
//
//   deceptforge attack    --case F --out DIR [--config F] [--backend URL]
//                         [--oracle URL|stub] [--seed N]
//   deceptforge eval      --dataset DIR --results DIR [--config F] ...
//   deceptforge detect    --code F --pattern-lib F --detector ID
//   deceptforge toy-serve --spec F --port N
//
// Backends are http(s) URLs speaking the /v1/score + /v1/generate protocol,
// or "toy:PATH" for an in-process toy model. Exit codes: 0 ok, 1 validation
// error, 2 transport failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "deceptforge/case_spec.hpp"
#include "deceptforge/detect.hpp"
#include "deceptforge/errors.hpp"
#include "deceptforge/eval.hpp"
#include "deceptforge/evolve.hpp"
#include "deceptforge/lexicon.hpp"
#include "deceptforge/model_client.hpp"
#include "deceptforge/oracle.hpp"
#include "deceptforge/report.hpp"
#include "deceptforge/wire.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace deceptforge {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitTransport = 2;

std::string ReadText(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Run configuration file. Relative paths resolve against its directory.
struct RunConfig {
  EvolutionConfig evolution;
  EvalOptions eval;
  std::string backend_url;
  std::string oracle = "stub";
  std::string scorer_url;
  std::string oracle_template{kDefaultParaphraseTemplate};
  std::string lexicon_path;
  std::string pattern_library_path;

  static RunConfig Load(const std::optional<fs::path>& path) {
    RunConfig c;
    if (!path) return c;
    json j;
    try {
      j = json::parse(ReadText(*path));
    } catch (const json::parse_error& e) {
      throw ConfigError("config " + path->string() + ": " + e.what());
    }
    const fs::path base = path->parent_path();
    auto resolve = [&](const std::string& p) {
      if (p.empty() || p == "stub" || p.find("://") != std::string::npos) return p;
      if (p.rfind("toy:", 0) == 0) {
        fs::path rest = p.substr(4);
        return "toy:" + (rest.is_absolute() ? rest : base / rest).string();
      }
      fs::path fp = p;
      return (fp.is_absolute() ? fp : base / fp).string();
    };
    try {
      if (j.contains("evolution")) c.evolution = EvolutionConfig::FromJson(j["evolution"]);
      c.backend_url = resolve(j.value("backend_url", ""));
      c.oracle = resolve(j.value("oracle", "stub"));
      c.scorer_url = resolve(j.value("scorer_url", ""));
      c.oracle_template = j.value("oracle_template", c.oracle_template);
      c.lexicon_path = resolve(j.value("lexicon", ""));
      c.pattern_library_path = resolve(j.value("pattern_library", ""));
      if (j.contains("eval")) {
        const auto& e = j["eval"];
        c.eval.n = e.value("n", c.eval.n);
        c.eval.sampling.temperature = e.value("temperature", c.eval.sampling.temperature);
        c.eval.sampling.top_p = e.value("top_p", c.eval.sampling.top_p);
        c.eval.sampling.max_tokens = e.value("max_tokens", c.eval.sampling.max_tokens);
        if (e.contains("top_k") && !e["top_k"].is_null()) {
          c.eval.sampling.top_k = e["top_k"].get<int>();
        }
        const auto rule = e.value("rule", std::string("any"));
        if (rule != "any" && rule != "all") throw ConfigError("eval.rule must be any or all");
        c.eval.rule = rule == "all" ? SuccessRule::kAll : SuccessRule::kAny;
      }
    } catch (const json::exception& e) {
      throw ConfigError("config " + path->string() + ": " + e.what());
    }
    return c;
  }
};

std::unique_ptr<ModelClient> MakeBackend(const std::string& url) {
  if (url.empty()) {
    throw ConfigError(
        "no backend given: pass --backend, set backend_url in the config, or "
        "export DECEPTFORGE_BACKEND_URL");
  }
  if (url.rfind("toy:", 0) == 0) {
    return std::make_unique<ToyModelClient>(ToyModelSpec::Load(url.substr(4)));
  }
  return std::make_unique<wire::HttpModelClient>(url);
}

std::string ResolveBackend(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (!cfg.backend_url.empty()) return cfg.backend_url;
  if (const char* env = std::getenv("DECEPTFORGE_BACKEND_URL")) return env;
  return {};
}

struct OracleBundle {
  std::unique_ptr<ModelClient> backend;
  std::unique_ptr<ParaphraseOracle> oracle;
};

OracleBundle MakeOracle(const std::string& spec, const RunConfig& cfg,
                        const SynonymLexicon& lexicon, uint64_t seed) {
  OracleBundle b;
  if (spec.empty() || spec == "stub") {
    b.oracle = std::make_unique<StubOracle>(lexicon);
    return b;
  }
  b.backend = MakeBackend(spec);
  SamplingParams p;
  p.temperature = 0.7;
  p.top_p = 0.95;
  p.max_tokens = 512;
  p.seed = seed;
  b.oracle = std::make_unique<LlmOracle>(*b.backend, cfg.oracle_template, p);
  return b;
}

std::string Require(const std::string& value, const char* what) {
  if (value.empty()) {
    throw ConfigError(std::string("missing ") + what +
                      " (flag or config file entry)");
  }
  return value;
}

// ------------------------------------------------------------------ attack

struct AttackArgs {
  std::string case_file, config_file, backend, oracle, out_dir;
  std::string lexicon, patterns;
  std::optional<uint64_t> seed;
  std::optional<int> iterations, group_size;
};

int RunAttackCommand(const AttackArgs& a, bool as_json) {
  RunConfig cfg = RunConfig::Load(a.config_file.empty()
                                      ? std::nullopt
                                      : std::optional<fs::path>(a.config_file));
  if (a.seed) cfg.evolution.rng_seed = *a.seed;
  if (a.iterations) cfg.evolution.iterations = *a.iterations;
  if (a.group_size) cfg.evolution.group_size = *a.group_size;
  cfg.evolution.Validate();

  const auto c = CaseSpec::Load(a.case_file);
  if (auto problems = c.Problems(); !problems.empty()) {
    throw ConfigError("case " + c.id + ": " + problems.front());
  }
  const auto lexicon_path =
      Require(a.lexicon.empty() ? cfg.lexicon_path : a.lexicon, "lexicon");
  const auto patterns_path = Require(
      a.patterns.empty() ? cfg.pattern_library_path : a.patterns, "pattern library");
  const auto lexicon = SynonymLexicon::Load(lexicon_path);
  const auto patterns = PatternLibrary::Load(patterns_path);
  const auto backend_url = ResolveBackend(a.backend, cfg);
  auto model = MakeBackend(backend_url);
  const std::string oracle_spec = a.oracle.empty() ? cfg.oracle : a.oracle;
  auto oracle = MakeOracle(oracle_spec, cfg, lexicon, cfg.evolution.rng_seed);

  const fs::path out = a.out_dir;
  fs::create_directories(out);
  json snapshot = {{"evolution", cfg.evolution.ToJson()},
                   {"case", c.ToJson()},
                   {"seed_template", c.SeedTemplateText()},
                   {"lexicon", lexicon.ToJson()},
                   {"detector_id", c.detector_id},
                   {"backend_url", backend_url},
                   {"oracle", oracle_spec}};
  report::WriteFile(out / "config.json", snapshot.dump(2) + "\n");

  AttackResult partial;
  AttackResult result;
  try {
    result = RunAttack(c, cfg.evolution, *model, *oracle.oracle, lexicon, patterns,
                       {}, &partial);
  } catch (const Error&) {
    if (!partial.trace.empty()) report::WriteAttackOutputs(out, partial);
    throw;
  }
  report::WriteAttackOutputs(out, result);

  if (as_json) {
    std::cout << json{{"case_id", c.id},
                      {"success", result.success},
                      {"best_total", result.best_loss.total},
                      {"l_p", result.best_loss.l_p},
                      {"l_q", result.best_loss.l_q},
                      {"iterations_used", result.iterations_used},
                      {"out", out.string()}}
                     .dump()
              << "\n";
  } else {
    std::cout << "case " << c.id << ": success=" << (result.success ? "true" : "false")
              << " best_loss=" << report::FormatDouble(result.best_loss.total)
              << " (l_p=" << report::FormatDouble(result.best_loss.l_p)
              << ", l_q=" << report::FormatDouble(result.best_loss.l_q) << ")"
              << " iterations=" << result.iterations_used << "\n"
              << "best prompt: " << result.best_genome.Text() << "\n"
              << "outputs in " << out.string() << "\n";
  }
  return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string dataset, results, config_file, backend, oracle, scorer;
  std::string lexicon, patterns, annotations;
  std::optional<uint64_t> seed;
  std::optional<int> n;
  std::string rule;
};

int RunEvalCommand(const EvalArgs& a, bool as_json) {
  RunConfig cfg = RunConfig::Load(a.config_file.empty()
                                      ? std::nullopt
                                      : std::optional<fs::path>(a.config_file));
  if (a.seed) {
    cfg.evolution.rng_seed = *a.seed;
    cfg.eval.sampling.seed = *a.seed;
  }
  if (a.n) cfg.eval.n = *a.n;
  if (!a.rule.empty()) cfg.eval.rule = a.rule == "all" ? SuccessRule::kAll : SuccessRule::kAny;
  const auto lexicon = SynonymLexicon::Load(
      Require(a.lexicon.empty() ? cfg.lexicon_path : a.lexicon, "lexicon"));
  const auto patterns = PatternLibrary::Load(Require(
      a.patterns.empty() ? cfg.pattern_library_path : a.patterns, "pattern library"));
  std::optional<Annotations> notes;
  if (!a.annotations.empty()) notes = Annotations::Load(a.annotations);
  cfg.eval.annotations = notes ? &*notes : nullptr;

  auto model = MakeBackend(ResolveBackend(a.backend, cfg));
  auto oracle = MakeOracle(a.oracle.empty() ? cfg.oracle : a.oracle, cfg, lexicon,
                           cfg.evolution.rng_seed);
  const std::string scorer_url = a.scorer.empty() ? cfg.scorer_url : a.scorer;
  std::unique_ptr<ModelClient> scorer;
  if (!scorer_url.empty()) scorer = MakeBackend(scorer_url);

  BenchmarkConfig bench;
  bench.evolution = cfg.evolution;
  bench.eval = cfg.eval;
  const auto rep = RunBenchmark(a.dataset, a.results, bench, *model, *oracle.oracle,
                                lexicon, patterns, scorer.get());
  if (as_json) {
    std::cout << EvalReportJson(rep).dump() << "\n";
  } else {
    std::cout << ReportTable(rep);
    for (const auto& c : rep.cases) {
      if (!c.error.empty()) std::cout << "error in " << c.case_id << ": " << c.error << "\n";
      if (!c.perplexity_error.empty()) {
        std::cout << "no perplexity for " << c.case_id << ": " << c.perplexity_error << "\n";
      }
    }
    std::cout << "report written to " << a.results << "\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------------ detect

int RunDetectCommand(const std::string& code_file, const std::string& lib_file,
                     const std::string& detector_id, bool as_json) {
  const auto lib = PatternLibrary::Load(lib_file);
  const auto verdict = lib.Get(detector_id).Scan(ReadText(code_file));
  if (as_json) {
    json matched = json::array();
    for (const auto& m : verdict.matched) {
      matched.push_back({{"pattern", m.pattern}, {"start", m.begin}, {"end", m.end}});
    }
    std::cout << json{{"detector_id", detector_id},
                      {"vulnerable", verdict.vulnerable},
                      {"needs_review", verdict.needs_review},
                      {"matched", matched}}
                     .dump()
              << "\n";
  } else {
    std::cout << "vulnerable=" << (verdict.vulnerable ? "true" : "false")
              << " needs_review=" << (verdict.needs_review ? "true" : "false") << "\n";
    for (const auto& m : verdict.matched) {
      std::cout << "  match [" << m.begin << "," << m.end << ") " << m.pattern << "\n";
    }
  }
  return kExitOk;
}

// --------------------------------------------------------------- toy-serve

int RunToyServeCommand(const std::string& spec_file, const std::string& host, int port,
                       bool as_json) {
  ToyModelClient model(ToyModelSpec::Load(spec_file));
  wire::ModelServer server(model);
  if (as_json) {
    std::cout << json{{"host", host}, {"port", port}}.dump() << std::endl;
  } else {
    std::cout << "serving toy model on http://" << host << ":" << port << std::endl;
  }
  if (!server.Listen(host, port)) {
    throw TransportError("cannot listen on " + host + ":" + std::to_string(port));
  }
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Evolve benign-looking prompt prefixes/suffixes that steer code "
               "models toward a targeted vulnerability."};
  app.name("deceptforge");
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable output");

  AttackArgs attack;
  auto* attack_cmd = app.add_subcommand("attack", "Optimize a prefix/suffix for one case");
  attack_cmd->add_option("--case", attack.case_file, "Case file (JSON)")->required();
  attack_cmd->add_option("--config", attack.config_file, "Run config (JSON)");
  attack_cmd->add_option("--backend", attack.backend, "Victim backend URL or toy:PATH");
  attack_cmd->add_option("--oracle", attack.oracle, "Paraphrase oracle URL or 'stub'");
  attack_cmd->add_option("--out", attack.out_dir, "Output directory")->required();
  attack_cmd->add_option("--lexicon", attack.lexicon, "Synonym lexicon (JSON)");
  attack_cmd->add_option("--pattern-lib", attack.patterns, "Pattern library (JSON)");
  attack_cmd->add_option("--seed", attack.seed, "RNG seed");
  attack_cmd->add_option("--iterations", attack.iterations, "Override iteration budget");
  attack_cmd->add_option("--group-size", attack.group_size, "Override group size");
  attack_cmd->add_flag("--json", as_json, "Machine-readable output");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Benchmark a dataset: V.R., ASR, WFR");
  eval_cmd->add_option("--dataset", ev.dataset, "Directory of case files")->required();
  eval_cmd->add_option("--results", ev.results, "Output directory")->required();
  eval_cmd->add_option("--config", ev.config_file, "Run config (JSON)");
  eval_cmd->add_option("--backend", ev.backend, "Victim backend URL or toy:PATH");
  eval_cmd->add_option("--oracle", ev.oracle, "Paraphrase oracle URL or 'stub'");
  eval_cmd->add_option("--scorer", ev.scorer, "Perplexity scorer URL or toy:PATH");
  eval_cmd->add_option("--lexicon", ev.lexicon, "Synonym lexicon (JSON)");
  eval_cmd->add_option("--pattern-lib", ev.patterns, "Pattern library (JSON)");
  eval_cmd->add_option("--annotations", ev.annotations, "Human annotations sidecar (JSON)");
  eval_cmd->add_option("--seed", ev.seed, "RNG seed");
  eval_cmd->add_option("--n", ev.n, "Samples per case (default 5)");
  eval_cmd->add_option("--rule", ev.rule, "Success rule over samples")
      ->check(CLI::IsMember({"any", "all"}));
  eval_cmd->add_flag("--json", as_json, "Machine-readable output");

  std::string code_file, lib_file, detector_id;
  auto* detect_cmd = app.add_subcommand("detect", "Scan code with one detector");
  detect_cmd->add_option("--code", code_file, "Code file")->required();
  detect_cmd->add_option("--pattern-lib", lib_file, "Pattern library (JSON)")->required();
  detect_cmd->add_option("--detector", detector_id, "Detector id")->required();
  detect_cmd->add_flag("--json", as_json, "Machine-readable output");

  std::string spec_file, host = "127.0.0.1";
  int port = 0;
  auto* serve_cmd = app.add_subcommand("toy-serve", "Serve a toy victim model over HTTP");
  serve_cmd->add_option("--spec", spec_file, "Toy model spec (JSON)")->required();
  serve_cmd->add_option("--port", port, "Port")->required();
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_flag("--json", as_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*attack_cmd) return RunAttackCommand(attack, as_json);
    if (*eval_cmd) return RunEvalCommand(ev, as_json);
    if (*detect_cmd) return RunDetectCommand(code_file, lib_file, detector_id, as_json);
    if (*serve_cmd) return RunToyServeCommand(spec_file, host, port, as_json);
  } catch (const TransportError& e) {
    std::cerr << "deceptforge: transport error: " << e.what() << "\n";
    return kExitTransport;
  } catch (const Error& e) {
    std::cerr << "deceptforge: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "deceptforge: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace
}  // namespace deceptforge

int main(int argc, char** argv) { return deceptforge::Main(argc, argv); }
