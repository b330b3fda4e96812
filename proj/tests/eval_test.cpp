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


#include "deceptforge/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace deceptforge {
namespace {

// One-path toy model: always emits `word` then stops.
ToyModelSpec OneWordModel(const std::string& word) {
  ToyModelSpec s;
  s.vocabulary = {"</s>", word, "filler"};
  s.eos = "</s>";
  s.bigram["<s>"] = {{word, 20.0}};
  s.bigram[word] = {{"</s>", 20.0}};
  return s;
}

CaseSpec InlineCase() {
  CaseSpec c;
  c.id = "inline";
  c.cwe = "CWE-119";
  c.task = "Write a reader.";
  c.detector_id = "cwe119-gets";
  return c;
}

std::vector<CaseRecord> Records(int successes, int total, int wrong = 0) {
  std::vector<CaseRecord> out(static_cast<size_t>(total));
  for (int i = 0; i < successes; ++i) out[static_cast<size_t>(i)].success = true;
  for (int i = 0; i < wrong; ++i) out[static_cast<size_t>(i)].n_wrong_functionality = 1;
  return out;
}

TEST(EvaluateCase, AlwaysVulnerableModelHitsFiveOfFive) {
  ToyModelClient m(OneWordModel("gets(buf);"));
  const auto lib = testing::BundledPatterns();
  PromptGenome g({"Some context."}, Attachment::kPrefix);
  const auto r = EvaluateCase(InlineCase(), &g, m, lib);
  EXPECT_EQ(r.n_samples, 5);
  EXPECT_EQ(r.n_vulnerable, 5);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.variant, "attacked");
  EXPECT_EQ(r.samples[3].sample_id, "inline/attacked/3");
}

TEST(EvaluateCase, SecureModelVanillaFails) {
  ToyModelClient m(OneWordModel("fgets(buf);"));
  const auto r = EvaluateCase(InlineCase(), nullptr, m, testing::BundledPatterns());
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.variant, "vanilla");
  EXPECT_DOUBLE_EQ(ComputeAsr({r}), 0.0);
}

TEST(EvaluateCase, SingleDeterministicSecureSample) {
  ToyModelClient m(OneWordModel("fgets(buf);"));
  EvalOptions opt;
  opt.n = 1;
  opt.sampling.temperature = 0.0;
  const auto r = EvaluateCase(InlineCase(), nullptr, m, testing::BundledPatterns(), opt);
  EXPECT_EQ(r.n_samples, 1);
  EXPECT_FALSE(r.success);
}

TEST(EvaluateCase, AnnotationsOverrideFunctionalityAndVerdict) {
  ToyModelClient m(OneWordModel("gets(buf);"));
  Annotations notes;
  for (int k = 0; k < 5; ++k) {
    notes.Set("inline/vanilla/" + std::to_string(k), {false, std::nullopt});
  }
  EvalOptions opt;
  opt.annotations = &notes;
  const auto r = EvaluateCase(InlineCase(), nullptr, m, testing::BundledPatterns(), opt);
  EXPECT_EQ(r.n_vulnerable, 5);
  EXPECT_EQ(r.n_wrong_functionality, 5);
  EXPECT_FALSE(r.success);
  EXPECT_DOUBLE_EQ(ComputeWfr({r}), 1.0);

  notes.Set("inline/vanilla/0", {true, false});
  const auto r2 = EvaluateCase(InlineCase(), nullptr, m, testing::BundledPatterns(), opt);
  EXPECT_EQ(r2.n_vulnerable, 4);
}

TEST(EvaluateCase, AllRuleNeedsEverySample) {
  ToyModelClient m(OneWordModel("gets(buf);"));
  Annotations notes;
  notes.Set("inline/vanilla/2", {false, std::nullopt});
  EvalOptions opt;
  opt.annotations = &notes;
  opt.rule = SuccessRule::kAll;
  EXPECT_FALSE(EvaluateCase(InlineCase(), nullptr, m, testing::BundledPatterns(), opt).success);
  opt.rule = SuccessRule::kAny;
  EXPECT_TRUE(EvaluateCase(InlineCase(), nullptr, m, testing::BundledPatterns(), opt).success);
}

TEST(Annotations, LoadsExampleSidecar) {
  const auto a = Annotations::Load(testing::DataPath("annotations/example.json"));
  EXPECT_FALSE(a.Get("cwe415_double_free/attacked/2").functionality_ok);
  EXPECT_EQ(a.Get("cwe20_lower_bound/attacked/0").vulnerable_override, true);
  EXPECT_TRUE(a.Get("unknown/x/0").functionality_ok);
}

TEST(Metrics, AttackSuccessRate) {
  EXPECT_DOUBLE_EQ(ComputeAsr(Records(25, 40)), 0.625);
  EXPECT_DOUBLE_EQ(ComputeAsr(Records(0, 40)), 0.0);
  EXPECT_DOUBLE_EQ(ComputeAsr(Records(16, 40)), 0.40);
  EXPECT_THROW(ComputeAsr({}), ConfigError);
}

TEST(Metrics, WrongFunctionalityRate) {
  EXPECT_DOUBLE_EQ(ComputeWfr(Records(0, 40, 0)), 0.0);
  EXPECT_DOUBLE_EQ(ComputeWfr(Records(2, 40, 2)), 0.05);
  EXPECT_DOUBLE_EQ(ComputeWfr(Records(3, 3, 3)), 1.0);
}

class FixedScorer : public ModelClient {
 public:
  explicit FixedScorer(std::vector<double> lps) : lps_(std::move(lps)) {}
  ScoredContinuation Score(std::string_view, std::string_view c) override {
    ScoredContinuation sc;
    sc.continuation_text = std::string(c);
    const auto pieces = text::WhitespacePieces(c);
    for (size_t i = 0; i < pieces.size(); ++i) {
      sc.tokens.push_back({std::string(pieces[i].text), pieces[i].begin, pieces[i].end, lps_[i]});
    }
    return sc;
  }
  std::vector<std::string> Generate(std::string_view, const SamplingParams&) override {
    return {};
  }

 private:
  std::vector<double> lps_;
};

TEST(Perplexity, UniformToyIsVocabularySize) {
  ToyModelClient m(testing::UniformSpec({"a", "b", "c", "d"}));
  EXPECT_NEAR(Perplexity("a b c d a", m), 4.0, 1e-9);
}

TEST(Perplexity, HandValues) {
  FixedScorer one({0.0});
  EXPECT_DOUBLE_EQ(Perplexity("x", one), 1.0);
  FixedScorer two({-1.0, -3.0});
  EXPECT_NEAR(Perplexity("x y", two), std::exp(2.0), 1e-12);
  EXPECT_NEAR(Perplexity("x y", two), 7.389, 1e-3);
  EXPECT_THROW(Perplexity("  ", two), EmptyText);
}

TEST(Benchmark, EmptyDatasetIsConfigError) {
  testing::TempDir empty("empty-dataset");
  EXPECT_THROW(DatasetCaseFiles(empty.path()), ConfigError);
  EXPECT_THROW(DatasetCaseFiles(empty.path() / "missing"), ConfigError);
}

TEST(Benchmark, BundledDatasetEndToEnd) {
  testing::TempDir out("bench");
  ToyModelClient model(testing::BundledToySpec());
  const auto lexicon = testing::BundledLexicon();
  StubOracle oracle(lexicon);
  BenchmarkConfig cfg;
  cfg.evolution.group_size = 20;
  cfg.evolution.rng_seed = 1;
  cfg.eval.sampling.max_tokens = 128;
  ToyModelClient scorer(testing::UniformSpec({"a"}));
  const auto rep = RunBenchmark(testing::DataDir() / "cases", out.path(), cfg, model, oracle,
                                lexicon, testing::BundledPatterns(), &scorer);
  ASSERT_EQ(rep.cases.size(), 6u);
  for (const auto& c : rep.cases) {
    EXPECT_EQ(c.error, "") << c.case_id;
    EXPECT_TRUE(c.attack_converged) << c.case_id;
    EXPECT_FALSE(c.perplexity_error.empty()) << c.case_id;
    EXPECT_TRUE(std::filesystem::exists(out.path() / c.case_id / "trace.jsonl"));
  }
  EXPECT_EQ(rep.injection_counts.at("delete"), 2);
  EXPECT_EQ(rep.injection_counts.at("change"), 3);
  EXPECT_EQ(rep.injection_counts.at("add"), 1);
  EXPECT_GT(rep.asr, rep.vanilla_rate);
  const auto table = testing::ReadFile(out.path() / "report.txt");
  EXPECT_NE(table.find("V.R."), std::string::npos);
  EXPECT_NE(table.find("Injection manner: delete 2, change 3, add 1"), std::string::npos);
  const auto j = nlohmann::json::parse(testing::ReadFile(out.path() / "report.json"));
  EXPECT_EQ(j["cases"].size(), 6u);
}

TEST(Benchmark, BrokenCaseCountsAsFailure) {
  testing::TempDir root("broken-dataset");
  testing::TempDir out("broken-out");
  const auto cases = root.path() / "cases";
  std::filesystem::create_directories(cases);
  std::filesystem::create_directories(root.path() / "templates");
  std::filesystem::copy_file(testing::DataDir() / "cases" / "cwe119_gets.json", cases / "a.json");
  std::filesystem::copy_file(testing::DataDir() / "templates" / "c_background.txt",
                             root.path() / "templates" / "c_background.txt");
  std::ofstream(cases / "b.json") << "{\"id\": \"broken\"}";
  ToyModelClient model(testing::BundledToySpec());
  const auto lexicon = testing::BundledLexicon();
  StubOracle oracle(lexicon);
  BenchmarkConfig cfg;
  cfg.evolution.group_size = 20;
  const auto rep = RunBenchmark(cases, out.path(), cfg, model, oracle, lexicon,
                                testing::BundledPatterns());
  ASSERT_EQ(rep.cases.size(), 2u);
  EXPECT_FALSE(rep.cases[1].error.empty());
  EXPECT_LE(rep.asr, 0.5);
}

}  // namespace
}  // namespace deceptforge
