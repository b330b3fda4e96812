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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "deceptforge/eval.hpp"
#include "deceptforge/evolve.hpp"
#include "deceptforge/fitness.hpp"
#include "deceptforge/report.hpp"
#include "deceptforge/wire.hpp"
#include "test_support.hpp"

namespace df = deceptforge;
namespace dft = deceptforge::testing;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Each check returns an empty string on success or a failure description.
using Check = std::function<std::string()>;

std::string LossDecomposition() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2026);
  std::uniform_real_distribution<double> lp(-12.0, 0.0);
  for (int fixture = 0; fixture < 1000; ++fixture) {
    df::ScoredContinuation sc;
    df::TokenLabeling labels;
    const size_t n = 1 + gen() % 64;
    for (size_t i = 0; i < n; ++i) {
      const std::string word = "w" + std::to_string(i);
      const size_t start = sc.continuation_text.size() + (i ? 1 : 0);
      if (i) sc.continuation_text += " ";
      sc.continuation_text += word;
      const double x = lp(gen);
      sc.tokens.push_back({word, start, start + word.size(), x});
      labels.labels.push_back(gen() % 3 == 0 ? df::SpanKind::kVulnerable
                                             : df::SpanKind::kBenign);
      if (df::OneHotKl(x) != df::OneHotCrossEntropy(x)) return "KL differs from CE";
    }
    const double split = df::FunctionalityLoss(sc, labels) + df::VulnerabilityLoss(sc, labels);
    const double vanilla = df::VanillaLoss(sc);
    if (std::abs(split - vanilla) > 1e-9) {
      return "fixture " + std::to_string(fixture) + ": split " + std::to_string(split) +
             " vs vanilla " + std::to_string(vanilla);
    }
    const auto b = df::Breakdown(sc, labels, df::LossWeights{});
    if (std::abs(b.total - vanilla) > 1e-9) return "breakdown total differs from vanilla";
  }
  const double s = Seconds(t0);
  if (s >= 5.0) return "took " + std::to_string(s) + " s";
  return {};
}

std::string SelectionDistribution() {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> loss(0.0, 50.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> l(1 + gen() % 40);
    for (auto& x : l) x = loss(gen);
    const auto p = df::SelectionProbabilities(l);
    double sum = 0.0;
    for (double v : p) sum += v;
    if (std::abs(sum - 1.0) > 1e-9) return "probabilities sum to " + std::to_string(sum);
    auto shifted = l;
    for (auto& x : shifted) x += 123.0;
    const auto q = df::SelectionProbabilities(shifted);
    for (size_t i = 0; i < p.size(); ++i) {
      if (std::abs(p[i] - q[i]) > 1e-12) return "not shift invariant";
    }
  }
  for (double v : df::SelectionProbabilities(std::vector<double>(8, 2.5))) {
    if (std::abs(v - 0.125) > 1e-12) return "equal losses are not uniform";
  }
  const auto two = df::SelectionProbabilities({0.0, std::log(2.0)});
  if (std::abs(two[0] - 2.0 / 3.0) > 1e-9 || std::abs(two[1] - 1.0 / 3.0) > 1e-9) {
    return "losses {0, ln 2} did not give {2/3, 1/3}";
  }
  return {};
}

struct ToyRun {
  df::CaseSpec c = dft::BundledCase("cwe119_gets");
  df::ToyModelClient model{dft::BundledToySpec()};
  df::SynonymLexicon lexicon = dft::BundledLexicon();
  df::StubOracle oracle{lexicon};
  df::PatternLibrary patterns = dft::BundledPatterns();

  df::AttackResult Run(const df::EvolutionConfig& cfg,
                       const df::IterationObserver& obs = {}) {
    return df::RunAttack(c, cfg, model, oracle, lexicon, patterns, obs);
  }
};

df::EvolutionConfig Small(uint64_t seed) {
  df::EvolutionConfig cfg;
  cfg.group_size = 20;
  cfg.rng_seed = seed;
  return cfg;
}

std::string EvolutionInvariants() {
  ToyRun run;
  auto cfg = Small(5);
  cfg.iterations = 50;
  cfg.early_stop = false;
  std::string problem;
  const auto r = run.Run(cfg, [&](const df::IterationSnapshot& s) {
    if (s.population->size() != 20u && problem.empty()) {
      problem = "population size " + std::to_string(s.population->size()) +
                " at iteration " + std::to_string(s.iteration);
    }
  });
  if (!problem.empty()) return problem;
  if (r.trace.size() != 51u) return "trace has " + std::to_string(r.trace.size()) + " rows";
  double running = std::numeric_limits<double>::infinity();
  for (const auto& t : r.trace) {
    if (t.best_total > running + 1e-12) {
      return "best loss rose at iteration " + std::to_string(t.iteration);
    }
    running = std::min(running, t.best_total);
  }

  // Crossover only swaps aligned sentences between neighbours, so each
  // position keeps its pair multiset.
  df::EvolutionConfig xcfg;
  xcfg.crossover_prob = 1.0;
  df::Rng rng(99);
  int checks = 0;
  while (checks < 10000) {
    std::vector<df::PromptGenome> parents;
    for (int i = 0; i < 2; ++i) {
      std::vector<std::string> s;
      for (int k = 0; k < 10; ++k) {
        s.push_back("p" + std::to_string(i) + "s" + std::to_string(k) + "r" +
                    std::to_string(checks) + ".");
      }
      parents.emplace_back(std::move(s), df::Attachment::kPrefix);
    }
    const auto out = df::CrossoverPopulation(parents, xcfg, rng);
    if (out.size() != 2u) return "crossover changed the population size";
    for (size_t k = 0; k < 10; ++k) {
      std::multiset<std::string> before{parents[0].sentences()[k], parents[1].sentences()[k]};
      std::multiset<std::string> after{out[0].sentences()[k], out[1].sentences()[k]};
      if (before != after) return "crossover lost a sentence at position " + std::to_string(k);
    }
    ++checks;
  }
  return {};
}

std::vector<std::string> Words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string PlantedTriggerRecovery() {
  const auto t0 = Clock::now();
  int wins = 0;
  std::string misses;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    ToyRun run;
    const auto r = run.Run(Small(seed));
    const bool words_match = Words(r.greedy_output) == Words(run.c.BuildTarget().code);
    const bool fires = run.patterns.Get(run.c.detector_id).Scan(r.greedy_output).vulnerable;
    if (r.success && words_match && fires &&
        r.greedy_output.find("gets") != std::string::npos) {
      ++wins;
    } else {
      misses += " " + std::to_string(seed);
    }
  }
  const double s = Seconds(t0);
  if (wins < 9) return std::to_string(wins) + "/10 seeds succeeded; missed:" + misses;
  if (s >= 60.0) return "took " + std::to_string(s) + " s";
  return {};
}

std::string DetectorCorpus() {
  const auto lib = dft::BundledPatterns();
  const auto corpus = nlohmann::json::parse(dft::ReadFile(dft::DataPath("corpus/corpus.json")));
  if (corpus.size() < 12) return "corpus has only " + std::to_string(corpus.size()) + " snippets";
  for (const auto& s : corpus) {
    const auto v = lib.Get(s["detector_id"]).Scan(s["code"].get<std::string>());
    if (v.vulnerable != s["expect_vulnerable"].get<bool>() ||
        v.needs_review != s["expect_needs_review"].get<bool>()) {
      return "snippet " + s["id"].get<std::string>() + " misjudged";
    }
  }
  return {};
}

std::vector<df::CaseRecord> Records(int successes, int total, int wrong) {
  std::vector<df::CaseRecord> out(static_cast<size_t>(total));
  for (int i = 0; i < successes; ++i) out[static_cast<size_t>(i)].success = true;
  for (int i = 0; i < wrong; ++i) out[static_cast<size_t>(i)].n_wrong_functionality = 1;
  return out;
}

std::string MetricValues() {
  if (df::ComputeAsr(Records(25, 40, 0)) != 0.625) return "ASR 25/40 != 0.625";
  if (df::ComputeAsr(Records(16, 40, 0)) != 0.40) return "ASR 16/40 != 0.40";
  if (df::ComputeWfr(Records(2, 40, 2)) != 0.05) return "WFR 2/40 != 0.05";
  df::ToyModelClient uniform(dft::UniformSpec({"a", "b", "c", "d"}));
  const double ppl = df::Perplexity("a b c d a", uniform);
  if (std::abs(ppl - 4.0) > 1e-9) return "uniform perplexity " + std::to_string(ppl);
  return {};
}

std::string Reproducibility() {
  dft::TempDir tmp("acceptance-repro");
  auto cfg = Small(7);
  cfg.iterations = 20;
  cfg.early_stop = false;
  cfg.mutation_prob = 0.2;
  for (const char* dir : {"a", "b"}) {
    ToyRun run;
    df::report::WriteAttackOutputs(tmp.path() / dir, run.Run(cfg));
  }
  for (const char* f : {"trace.jsonl", "progress.csv", "loss.svg", "best_genome.txt",
                        "report.json"}) {
    if (dft::ReadFile(tmp.path() / "a" / f) != dft::ReadFile(tmp.path() / "b" / f)) {
      return std::string(f) + " differs between identical runs";
    }
  }

  df::BenchmarkConfig bench;
  bench.evolution = Small(3);
  for (const char* dir : {"ea", "eb"}) {
    ToyRun run;
    df::RunBenchmark(dft::DataPath("cases"), tmp.path() / dir, bench, run.model, run.oracle,
                     run.lexicon, run.patterns);
  }
  for (const char* f : {"report.json", "report.txt"}) {
    if (dft::ReadFile(tmp.path() / "ea" / f) != dft::ReadFile(tmp.path() / "eb" / f)) {
      return std::string("benchmark ") + f + " differs between identical runs";
    }
  }
  return {};
}

std::string ServerProtocol() {
  df::ToyModelClient model(dft::BundledToySpec());
  df::wire::ModelServer server(model);
  const int port = server.StartInBackground();
  df::wire::HttpModelClient client("http://127.0.0.1:" + std::to_string(port));
  const auto& vocab = model.model().vocabulary();
  std::mt19937_64 gen(8);
  const char* spaces[] = {" ", "  ", "\n", "\n    ", "\t"};
  for (int i = 0; i < 1000; ++i) {
    std::string prompt = "Task:";
    for (size_t k = 0, n = gen() % 12; k < n; ++k) {
      prompt += spaces[gen() % 5] + vocab[gen() % vocab.size()];
    }
    std::string cont;
    const size_t n = 1 + gen() % 10;
    for (size_t k = 0; k < n; ++k) {
      if (k) cont += spaces[gen() % 5];
      cont += vocab[gen() % vocab.size()];
    }
    // The client already rejects malformed responses; compare against the
    // in-process model too.
    const auto remote = client.Score(prompt, cont);
    if (auto p = df::CheckScoredContinuation(remote); !p.empty()) return p;
    if (remote.tokens.size() != n) return "wrong token count for prompt " + std::to_string(i);
    if (remote != model.Score(prompt, cont)) return "remote score differs at " + std::to_string(i);
  }
  df::SamplingParams sp;
  sp.n = 3;
  sp.max_tokens = 16;
  sp.seed = 4;
  const auto outs = client.Generate("Write a reader.", sp);
  if (outs.size() != 3u) return "generate returned " + std::to_string(outs.size()) + " outputs";
  if (outs != model.Generate("Write a reader.", sp)) return "remote generate differs";
  return {};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Check>> criteria = {
      {"split loss equals vanilla loss on random fixtures", LossDecomposition},
      {"selection probabilities are a shift-invariant softmax", SelectionDistribution},
      {"population size and best loss invariants; crossover preserves sentences",
       EvolutionInvariants},
      {"planted trigger recovered on the toy model", PlantedTriggerRecovery},
      {"detector agrees with the labeled corpus", DetectorCorpus},
      {"ASR, WFR and perplexity hand values", MetricValues},
      {"same seed gives byte-identical outputs", Reproducibility},
      {"served model speaks the scoring protocol", ServerProtocol},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    std::string problem;
    try {
      problem = criteria[i].second();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    const bool ok = problem.empty();
    failures += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first;
    if (!ok) std::cout << " (" << problem << ")";
    std::cout << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
