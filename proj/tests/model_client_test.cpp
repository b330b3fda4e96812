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


#include "deceptforge/model_client.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

namespace deceptforge {
namespace {

using testing::UniformSpec;

TEST(ToyModel, UniformVocabularyScoresLnQuarter) {
  ToyModelClient m(UniformSpec({"a", "b", "c", "d"}));
  const auto sc = m.Score("anything", "c");
  ASSERT_EQ(sc.tokens.size(), 1u);
  EXPECT_NEAR(sc.tokens[0].logprob, std::log(0.25), 1e-12);
  EXPECT_NEAR(sc.tokens[0].logprob, -1.3863, 1e-4);
}

TEST(ToyModel, TriggerBoostMatchesHandSoftmax) {
  auto spec = UniformSpec({"gets", "fgets"});
  spec.triggers["legacy"] = {{"gets", 2.0}};
  ToyModelClient m(spec);
  const double want = std::log(std::exp(2.0) / (std::exp(2.0) + 1.0));
  EXPECT_NEAR(m.Score("a legacy program", "gets").tokens[0].logprob, want, 1e-12);
  EXPECT_NEAR(want, -0.1269, 1e-4);
  EXPECT_NEAR(m.Score("a modern program", "gets").tokens[0].logprob, std::log(0.5), 1e-12);
}

TEST(ToyModel, TriggersAddAndCountOnce) {
  auto spec = UniformSpec({"x", "y"});
  spec.triggers["one"] = {{"x", 1.0}};
  spec.triggers["two"] = {{"x", 0.5}};
  ToyModel m(spec);
  const auto d = m.NextDistribution("one two one ONE", std::nullopt);
  EXPECT_NEAR(d.at("x"), 1.0 / (1.0 + std::exp(-1.5)), 1e-12);
}

TEST(ToyModel, GatedTriggersOnlyActOnBigramEdges) {
  auto spec = UniformSpec({"a", "b", "c"});
  spec.bigram["a"] = {{"b", 1.0}};
  spec.triggers["t"] = {{"b", 2.0}};
  spec.gated_triggers = true;
  ToyModel m(spec);
  const auto start = m.NextDistribution("t", std::nullopt);
  EXPECT_NEAR(start.at("b"), 1.0 / 3.0, 1e-12);
  const auto after_a = m.NextDistribution("t", std::string_view("a"));
  const double e3 = std::exp(3.0);
  EXPECT_NEAR(after_a.at("b"), e3 / (e3 + 2.0), 1e-12);
}

TEST(Softmax, ConstantLogitsAreUniform) {
  for (double p : Softmax({0.0, 0.0, 0.0, 0.0})) EXPECT_NEAR(p, 0.25, 1e-15);
}

TEST(Softmax, TwoAndZero) {
  const auto p = Softmax({2.0, 0.0});
  EXPECT_NEAR(p[0], 0.8808, 5e-5);
  EXPECT_NEAR(p[1], 0.1192, 5e-5);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(LogSumExp, StableForLargeInputs) {
  EXPECT_NEAR(LogSumExp({1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-9);
}

TEST(ToyModel, ScoreSpansTileContinuationAndLogprobsNonPositive) {
  ToyModelClient m(testing::BundledToySpec());
  const auto c = testing::BundledCase("cwe119_gets");
  const auto t = c.BuildTarget();
  const auto sc = m.Score(c.task, t.code);
  EXPECT_EQ(CheckScoredContinuation(sc), "");
  EXPECT_EQ(sc.continuation_text, t.code);
  for (const auto& tok : sc.tokens) EXPECT_LE(tok.logprob, 0.0);
}

TEST(ToyModel, LeadingAndTrailingWhitespaceIsCovered) {
  ToyModelClient m(UniformSpec({"a", "b"}));
  const auto sc = m.Score("p", "  a \n b  ");
  EXPECT_EQ(CheckScoredContinuation(sc), "");
  ASSERT_EQ(sc.tokens.size(), 2u);
  EXPECT_EQ(sc.tokens[0].text, "  a");
  EXPECT_EQ(sc.tokens[1].text, " \n b  ");
}

TEST(ToyModel, ScoreErrors) {
  ToyModelClient m(UniformSpec({"a"}));
  EXPECT_THROW(m.Score("p", ""), EmptyText);
  EXPECT_THROW(m.Score("p", "   "), EmptyText);
  EXPECT_THROW(m.Score("", "a"), EmptyText);
  EXPECT_THROW(m.Score("p", "a zz"), TokenizationError);
}

TEST(ToyModelSpec, ValidationErrors) {
  auto spec = UniformSpec({"a", "a"});
  EXPECT_THROW(spec.Validate(), ConfigError);
  spec = UniformSpec({"a"});
  spec.bigram["a"] = {{"zz", 1.0}};
  EXPECT_THROW(spec.Validate(), VocabError);
  spec = UniformSpec({"a"});
  spec.triggers["t"] = {{"a", -1.0}};
  EXPECT_THROW(spec.Validate(), ConfigError);
}

TEST(ToyModelSpec, JsonRoundTrip) {
  const auto spec = testing::BundledToySpec();
  const auto again = ToyModelSpec::FromJson(spec.ToJson());
  EXPECT_EQ(again.ToJson(), spec.ToJson());
}

TEST(Generate, GreedyIsArgmaxAndIdenticalAcrossN) {
  ToyModelClient m(testing::BundledToySpec());
  const auto c = testing::BundledCase("cwe119_gets");
  auto p = SamplingParams::Greedy(64);
  p.n = 4;
  const auto out = m.Generate(c.task, p);
  ASSERT_EQ(out.size(), 4u);
  for (const auto& o : out) EXPECT_EQ(o, out[0]);
  std::string solution_words;
  for (const auto& piece : text::WhitespacePieces(c.solution_code)) {
    solution_words += (solution_words.empty() ? "" : " ") + std::string(piece.text);
  }
  EXPECT_EQ(out[0], solution_words);
}

TEST(Generate, GreedyTieGoesToLowestIndex) {
  ToyModelClient m(UniformSpec({"b", "a"}));
  EXPECT_EQ(m.Generate("p", SamplingParams::Greedy(3))[0], "b b b");
}

TEST(Generate, SeededSamplingIsReproducible) {
  ToyModelClient m(UniformSpec({"a", "b", "c", "d", "e"}));
  SamplingParams p;
  p.n = 5;
  p.temperature = 1.0;
  p.max_tokens = 12;
  p.seed = 42;
  const auto x = m.Generate("p", p);
  const auto y = m.Generate("p", p);
  EXPECT_EQ(x, y);
  EXPECT_NE(x[0], x[1]);
  p.seed = 43;
  EXPECT_NE(m.Generate("p", p), x);
}

TEST(Generate, EosStopsGeneration) {
  auto spec = UniformSpec({"</s>", "a"});
  spec.eos = "</s>";
  spec.bigram["<s>"] = {{"a", 5.0}};
  spec.bigram["a"] = {{"</s>", 5.0}};
  ToyModelClient m(spec);
  EXPECT_EQ(m.Generate("p", SamplingParams::Greedy(10))[0], "a");
}

TEST(SampleIndex, TopKOneIsGreedy) {
  SamplingParams p;
  p.temperature = 5.0;
  p.top_k = 1;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(SampleIndex({0.0, 3.0, 1.0}, p, rng), 1u);
}

TEST(SampleIndex, TopPTruncatesTail) {
  SamplingParams p;
  p.temperature = 1.0;
  p.top_p = 0.5;
  Rng rng(2);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(SampleIndex({4.0, 0.0, 0.0}, p, rng), 0u);
}

TEST(SampleIndex, FrequenciesFollowSoftmax) {
  SamplingParams p;
  p.temperature = 1.0;
  Rng rng(3);
  const std::vector<double> logits{std::log(0.5), std::log(0.3), std::log(0.2)};
  std::vector<int> counts(3, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[SampleIndex(logits, p, rng)];
  EXPECT_NEAR(counts[0] / double(n), 0.5, 0.01);
  EXPECT_NEAR(counts[1] / double(n), 0.3, 0.01);
  EXPECT_NEAR(counts[2] / double(n), 0.2, 0.01);
}

TEST(SamplingParams, Validation) {
  SamplingParams p;
  p.n = 0;
  EXPECT_THROW(p.Validate(), ConfigError);
  p = {};
  p.top_p = 0.0;
  EXPECT_THROW(p.Validate(), ConfigError);
  p = {};
  p.temperature = -1.0;
  EXPECT_THROW(p.Validate(), ConfigError);
  p = {};
  p.top_k = 0;
  EXPECT_THROW(p.Validate(), ConfigError);
}

TEST(Rng, StreamsAreIndependentAndStable) {
  auto a = Rng::Stream(7, "select", 0);
  auto b = Rng::Stream(7, "select", 0);
  auto c = Rng::Stream(7, "select", 1);
  auto d = Rng::Stream(7, "mutate", 0);
  const auto x = a.NextU64();
  EXPECT_EQ(x, b.NextU64());
  EXPECT_NE(x, c.NextU64());
  EXPECT_NE(x, d.NextU64());
}

TEST(Rng, UniformIntStaysInRange) {
  Rng r(5);
  std::vector<int> seen(4, 0);
  for (int i = 0; i < 4000; ++i) {
    const auto v = r.UniformInt(3, 6);
    ASSERT_GE(v, 3u);
    ASSERT_LE(v, 6u);
    ++seen[v - 3];
  }
  for (int s : seen) EXPECT_GT(s, 800);
}

}  // namespace
}  // namespace deceptforge
