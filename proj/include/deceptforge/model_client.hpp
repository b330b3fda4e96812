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

#ifndef DECEPTFORGE_MODEL_CLIENT_HPP_
#define DECEPTFORGE_MODEL_CLIENT_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/rng.hpp"
#include "deceptforge/scored.hpp"
#include "deceptforge/text.hpp"
#include "json.hpp"

namespace deceptforge {

struct SamplingParams {
  int n = 1;
  int max_tokens = 256;
  double temperature = 0.0;  // 0 means greedy, whatever top_p/top_k say
  double top_p = 1.0;
  std::optional<int> top_k;
  std::optional<uint64_t> seed;

  void Validate() const {
    if (n < 1) throw ConfigError("sampling n must be >= 1");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
      throw ConfigError("temperature must be finite and >= 0");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0,1]");
    if (top_k && *top_k < 1) throw ConfigError("top_k must be >= 1");
  }

  static SamplingParams Greedy(int max_tokens = 256) {
    SamplingParams p;
    p.max_tokens = max_tokens;
    return p;
  }
};

// Gray-box access to a victim model. Implementations must tolerate
// concurrent calls.
class ModelClient {
 public:
  virtual ~ModelClient() = default;

  // Teacher-forced logprobs for exactly `continuation` after `prompt`.
  virtual ScoredContinuation Score(std::string_view prompt,
                                   std::string_view continuation) = 0;

  virtual std::vector<std::string> Generate(std::string_view prompt,
                                            const SamplingParams& params) = 0;
};

// log(sum(exp(x))) without overflow.
inline double LogSumExp(const std::vector<double>& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

inline std::vector<double> Softmax(const std::vector<double>& logits) {
  const double lse = LogSumExp(logits);
  std::vector<double> p(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) p[i] = std::exp(logits[i] - lse);
  return p;
}

// Picks an index from `logits` per `params`, drawing from `rng` only when
// sampling (temperature > 0). Greedy ties go to the lowest index.
inline size_t SampleIndex(const std::vector<double>& logits,
                          const SamplingParams& params, Rng& rng) {
  if (params.temperature == 0.0) {
    return static_cast<size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  std::vector<double> scaled(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    scaled[i] = logits[i] / params.temperature;
  }
  std::vector<size_t> order(logits.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scaled[a] > scaled[b]; });
  size_t keep = order.size();
  if (params.top_k) keep = std::min(keep, static_cast<size_t>(*params.top_k));
  std::vector<double> kept(keep);
  for (size_t i = 0; i < keep; ++i) kept[i] = scaled[order[i]];
  auto probs = Softmax(kept);
  if (params.top_p < 1.0) {
    double cum = 0.0;
    size_t cut = probs.size();
    for (size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (cum >= params.top_p) {
        cut = i + 1;
        break;
      }
    }
    probs.resize(cut);
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& p : probs) p /= total;
  }
  const double u = rng.Uniform();
  double cum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return order[i];
  }
  return order[probs.size() - 1];
}

// Declarative description of the built-in toy victim. Tokens are whitespace
// words. The logit of word w after previous word v, given the prompt's word
// set T, is base(w) + bigram(v, w) + sum over triggers t in T of boost(t, w).
// With gated_triggers the boosts only count where bigram(v, w) is defined.
struct ToyModelSpec {
  static constexpr std::string_view kStart = "<s>";

  std::vector<std::string> vocabulary;
  std::map<std::string, double> base_logits;
  std::map<std::string, std::map<std::string, double>> bigram;
  std::map<std::string, std::map<std::string, double>> triggers;
  std::optional<std::string> eos;
  bool gated_triggers = false;

  void Validate() const {
    if (vocabulary.empty()) throw ConfigError("toy vocabulary is empty");
    std::set<std::string> seen;
    for (const auto& w : vocabulary) {
      if (w.empty() || std::any_of(w.begin(), w.end(), text::IsSpace)) {
        throw ConfigError("toy vocabulary word '" + w +
                          "' is empty or has whitespace");
      }
      if (!seen.insert(w).second) {
        throw ConfigError("duplicate toy vocabulary word '" + w + "'");
      }
    }
    auto require = [&](const std::string& w) {
      if (!seen.count(w)) throw VocabError("'" + w + "' is not in the vocabulary");
    };
    for (const auto& [w, v] : base_logits) {
      require(w);
      if (!std::isfinite(v)) throw ConfigError("non-finite base logit");
    }
    for (const auto& [prev, row] : bigram) {
      if (prev != kStart) require(prev);
      for (const auto& [w, v] : row) {
        require(w);
        if (!std::isfinite(v)) throw ConfigError("non-finite bigram bonus");
      }
    }
    for (const auto& [trig, row] : triggers) {
      if (trig.empty() || text::ToLower(trig) != trig ||
          !std::all_of(trig.begin(), trig.end(), text::IsAlpha)) {
        throw ConfigError("trigger '" + trig +
                          "' must be a lowercase alphabetic word");
      }
      for (const auto& [w, v] : row) {
        require(w);
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw ConfigError("trigger boosts must be finite and >= 0");
        }
      }
    }
    if (eos) require(*eos);
  }

  static ToyModelSpec FromJson(const nlohmann::json& j) {
    ToyModelSpec s;
    try {
      s.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
      if (j.contains("base_logits")) {
        s.base_logits = j["base_logits"].get<std::map<std::string, double>>();
      }
      if (j.contains("bigram")) {
        s.bigram = j["bigram"]
                       .get<std::map<std::string, std::map<std::string, double>>>();
      }
      if (j.contains("triggers")) {
        s.triggers = j["triggers"]
                         .get<std::map<std::string, std::map<std::string, double>>>();
      }
      if (j.contains("eos") && !j["eos"].is_null()) {
        s.eos = j["eos"].get<std::string>();
      }
      s.gated_triggers = j.value("gated_triggers", false);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad toy model spec: ") + e.what());
    }
    s.Validate();
    return s;
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["vocabulary"] = vocabulary;
    j["base_logits"] = base_logits;
    j["bigram"] = bigram;
    j["triggers"] = triggers;
    j["eos"] = eos ? nlohmann::json(*eos) : nlohmann::json(nullptr);
    j["gated_triggers"] = gated_triggers;
    return j;
  }

  static ToyModelSpec Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open toy model spec " + path);
    try {
      return FromJson(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("toy model spec " + path + ": " + e.what());
    }
  }
};

// Deterministic, reentrant evaluator of a ToyModelSpec.
class ToyModel {
 public:
  explicit ToyModel(ToyModelSpec spec) : spec_(std::move(spec)) {
    spec_.Validate();
    const size_t v = spec_.vocabulary.size();
    for (size_t i = 0; i < v; ++i) index_[spec_.vocabulary[i]] = i;
    base_.assign(v, 0.0);
    for (const auto& [w, x] : spec_.base_logits) base_[index_.at(w)] = x;
    auto dense = [&](const std::map<std::string, double>& row) {
      std::vector<std::pair<size_t, double>> out;
      for (const auto& [w, x] : row) out.emplace_back(index_.at(w), x);
      return out;
    };
    for (const auto& [prev, row] : spec_.bigram) bigram_[prev] = dense(row);
    for (const auto& [t, row] : spec_.triggers) triggers_[t] = dense(row);
  }

  const ToyModelSpec& spec() const { return spec_; }
  const std::vector<std::string>& vocabulary() const { return spec_.vocabulary; }

  std::optional<size_t> IndexOf(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Sum of trigger boosts active for `prompt`; each trigger counts once.
  std::vector<double> PromptBias(std::string_view prompt) const {
    std::vector<double> bias(base_.size(), 0.0);
    std::set<std::string> words;
    for (auto& w : text::LowerWords(prompt)) words.insert(std::move(w));
    for (const auto& w : words) {
      auto it = triggers_.find(w);
      if (it == triggers_.end()) continue;
      for (const auto& [i, x] : it->second) bias[i] += x;
    }
    return bias;
  }

  std::vector<double> NextLogits(const std::vector<double>& prompt_bias,
                                 std::optional<std::string_view> previous) const {
    std::vector<double> logits(base_);
    if (!spec_.gated_triggers) {
      for (size_t i = 0; i < logits.size(); ++i) logits[i] += prompt_bias[i];
    }
    const std::string key = previous ? std::string(*previous)
                                     : std::string(ToyModelSpec::kStart);
    if (previous && !index_.count(key)) {
      throw VocabError("previous word '" + key + "' is not in the vocabulary");
    }
    auto it = bigram_.find(key);
    if (it != bigram_.end()) {
      for (const auto& [i, x] : it->second) {
        logits[i] += x + (spec_.gated_triggers ? prompt_bias[i] : 0.0);
      }
    }
    return logits;
  }

  std::map<std::string, double> NextDistribution(
      std::string_view prompt, std::optional<std::string_view> previous) const {
    const auto probs = Softmax(NextLogits(PromptBias(prompt), previous));
    std::map<std::string, double> out;
    for (size_t i = 0; i < probs.size(); ++i) out[spec_.vocabulary[i]] = probs[i];
    return out;
  }

  ScoredContinuation Score(std::string_view prompt,
                           std::string_view continuation) const {
    if (text::Trim(prompt).empty()) throw EmptyText("prompt is empty");
    if (text::Trim(continuation).empty()) {
      throw EmptyText("continuation is empty");
    }
    const auto pieces = text::WhitespacePieces(continuation);
    const auto bias = PromptBias(prompt);
    ScoredContinuation out;
    out.continuation_text = std::string(continuation);
    std::optional<std::string_view> prev;
    size_t cursor = 0;
    for (size_t k = 0; k < pieces.size(); ++k) {
      const auto& p = pieces[k];
      auto idx = IndexOf(p.text);
      if (!idx) {
        throw TokenizationError("'" + std::string(p.text) +
                                "' is not in the toy vocabulary");
      }
      const auto logits = NextLogits(bias, prev);
      const double lp = logits[*idx] - LogSumExp(logits);
      const size_t end = k + 1 == pieces.size() ? continuation.size() : p.end;
      out.tokens.push_back({std::string(continuation.substr(cursor, end - cursor)),
                            cursor, end, std::min(lp, 0.0)});
      cursor = end;
      prev = p.text;
    }
    return out;
  }

  std::string GenerateOne(std::string_view prompt, const SamplingParams& params,
                          Rng& rng) const {
    const auto bias = PromptBias(prompt);
    std::vector<std::string> words;
    std::optional<std::string_view> prev;
    for (int t = 0; t < params.max_tokens; ++t) {
      const size_t i = SampleIndex(NextLogits(bias, prev), params, rng);
      const std::string& w = spec_.vocabulary[i];
      if (spec_.eos && w == *spec_.eos) break;
      words.push_back(w);
      prev = w;
    }
    return text::Join(words, " ");
  }

 private:
  ToyModelSpec spec_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<double> base_;
  std::unordered_map<std::string, std::vector<std::pair<size_t, double>>> bigram_;
  std::unordered_map<std::string, std::vector<std::pair<size_t, double>>> triggers_;
};

// In-process client backed by a ToyModel. Counts backend calls so callers can
// observe caching.
class ToyModelClient : public ModelClient {
 public:
  explicit ToyModelClient(ToyModelSpec spec) : model_(std::move(spec)) {}

  ScoredContinuation Score(std::string_view prompt,
                           std::string_view continuation) override {
    ++score_calls_;
    return model_.Score(prompt, continuation);
  }

  std::vector<std::string> Generate(std::string_view prompt,
                                    const SamplingParams& params) override {
    params.Validate();
    ++generate_calls_;
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(params.n));
    for (int k = 0; k < params.n; ++k) {
      Rng rng = params.seed ? Rng::Stream(*params.seed, "generate",
                                          static_cast<uint64_t>(k))
                            : Rng(std::random_device{}());
      out.push_back(model_.GenerateOne(prompt, params, rng));
    }
    return out;
  }

  const ToyModel& model() const { return model_; }
  size_t score_calls() const { return score_calls_.load(); }
  size_t generate_calls() const { return generate_calls_.load(); }

 private:
  ToyModel model_;
  std::atomic<size_t> score_calls_{0};
  std::atomic<size_t> generate_calls_{0};
};

}  // namespace deceptforge

#endif  // DECEPTFORGE_MODEL_CLIENT_HPP_
