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

#ifndef DECEPTFORGE_ORACLE_HPP_
#define DECEPTFORGE_ORACLE_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/genome.hpp"
#include "deceptforge/lexicon.hpp"
#include "deceptforge/model_client.hpp"
#include "deceptforge/text.hpp"

namespace deceptforge {

enum class ParaphraseMode { kSentence, kWhole };

struct ParaphraseRequest {
  std::string text;
  ParaphraseMode mode = ParaphraseMode::kWhole;
  double length_tolerance = 0.3;
};

// A semantics-preserving rewriter. `Rewrite` is the raw call; the contract
// (length, sentence count, retries) lives in Paraphrase() below.
class ParaphraseOracle {
 public:
  virtual ~ParaphraseOracle() = default;
  virtual std::string Rewrite(const ParaphraseRequest& req) = 0;
};

// Rotates every lexicon word one step around its ring and leaves the rest of
// the text alone. Pure and deterministic.
class StubOracle : public ParaphraseOracle {
 public:
  explicit StubOracle(SynonymLexicon lexicon) : lexicon_(std::move(lexicon)) {}

  std::string Rewrite(const ParaphraseRequest& req) override {
    return Rotate(req.text);
  }

  std::string Rotate(std::string_view in) const {
    std::string out;
    size_t cursor = 0;
    for (const auto& r : text::AlphaRuns(in)) {
      out.append(in.substr(cursor, r.begin - cursor));
      const auto original = in.substr(r.begin, r.end - r.begin);
      if (auto next = lexicon_.Next(text::ToLower(original))) {
        out.append(MatchCase(original, *next));
      } else {
        out.append(original);
      }
      cursor = r.end;
    }
    out.append(in.substr(cursor));
    return out;
  }

  const SynonymLexicon& lexicon() const { return lexicon_; }

 private:
  SynonymLexicon lexicon_;
};

inline constexpr std::string_view kDefaultParaphraseTemplate =
    "Rewrite the following text without changing its semantic meaning. Keep a "
    "similar length and exactly the same number of sentences. Reply with the "
    "rewritten text only.\n\n{text}";

// Adapts any generation backend (a chat model behind /v1/generate) into an
// oracle. `{text}` in the template is replaced by the request text.
class LlmOracle : public ParaphraseOracle {
 public:
  LlmOracle(ModelClient& backend, std::string instruction_template,
            SamplingParams params)
      : backend_(backend),
        template_(std::move(instruction_template)),
        params_(std::move(params)) {
    params_.n = 1;
  }

  std::string Rewrite(const ParaphraseRequest& req) override {
    std::string prompt = template_;
    const auto at = prompt.find("{text}");
    if (at == std::string::npos) {
      prompt += "\n\n" + req.text;
    } else {
      prompt.replace(at, 6, req.text);
    }
    auto out = backend_.Generate(prompt, params_);
    return out.empty() ? std::string() : std::string(text::Trim(out.front()));
  }

 private:
  ModelClient& backend_;
  std::string template_;
  SamplingParams params_;
};

inline constexpr int kParaphraseRetries = 3;

// True when `candidate` honors the paraphrase contract for `req`.
inline bool AcceptableParaphrase(const ParaphraseRequest& req,
                                 std::string_view candidate) {
  if (text::Trim(candidate).empty()) return false;
  const double in_words = static_cast<double>(text::CountWords(req.text));
  const double out_words = static_cast<double>(text::CountWords(candidate));
  if (out_words < (1.0 - req.length_tolerance) * in_words - 1e-9 ||
      out_words > (1.0 + req.length_tolerance) * in_words + 1e-9) {
    return false;
  }
  return ParseSentences(candidate).size() == ParseSentences(req.text).size();
}

// Asks the oracle for a paraphrase, retrying rejected answers up to three
// times before giving back the input unchanged. Transport failures propagate.
inline std::string Paraphrase(ParaphraseOracle& oracle,
                              const ParaphraseRequest& req) {
  if (text::Trim(req.text).empty()) throw EmptyText("nothing to paraphrase");
  for (int attempt = 0; attempt <= kParaphraseRetries; ++attempt) {
    std::string candidate(text::Trim(oracle.Rewrite(req)));
    if (AcceptableParaphrase(req, candidate)) return candidate;
  }
  return req.text;
}

// Initial population: the seed itself followed by size-1 paraphrases of it.
// If the oracle becomes unreachable, the rest is filled from `fallback`.
inline std::vector<PromptGenome> SeedGroup(const PromptGenome& seed, size_t size,
                                           ParaphraseOracle& oracle,
                                           StubOracle& fallback,
                                           double length_tolerance = 0.3) {
  if (size < 1) throw ConfigError("seed group size must be >= 1");
  std::vector<PromptGenome> group;
  group.reserve(size);
  group.push_back(seed.WithId("seed-0"));
  const ParaphraseRequest req{seed.Text(), ParaphraseMode::kWhole,
                              length_tolerance};
  bool oracle_alive = true;
  for (size_t i = 1; i < size; ++i) {
    std::string body;
    if (oracle_alive) {
      try {
        body = Paraphrase(oracle, req);
      } catch (const TransportError&) {
        oracle_alive = false;
      }
    }
    if (!oracle_alive) body = Paraphrase(fallback, req);
    group.push_back(PromptGenome::FromText(body, seed.attachment(),
                                           "seed-" + std::to_string(i)));
  }
  return group;
}

}  // namespace deceptforge

#endif  // DECEPTFORGE_ORACLE_HPP_
