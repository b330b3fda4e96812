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

#ifndef DECEPTFORGE_FITNESS_HPP_
#define DECEPTFORGE_FITNESS_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <future>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/genome.hpp"
#include "deceptforge/model_client.hpp"
#include "deceptforge/scored.hpp"
#include "deceptforge/target.hpp"
#include "json.hpp"

namespace deceptforge {

enum class LossMode { kSplit, kVanilla };

struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  LossMode mode = LossMode::kSplit;
  // Average instead of sum within each part; off by default.
  bool per_token_mean = false;

  void Validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
      throw ConfigError("loss weights must be >= 0");
    }
  }
};

struct TokenContribution {
  size_t token_index = 0;
  SpanKind kind = SpanKind::kBenign;
  double contribution = 0.0;
};

struct LossBreakdown {
  double l_p = 0.0;  // functionality, nats
  double l_q = 0.0;  // vulnerability, nats
  double total = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  std::vector<TokenContribution> per_token;
};

// With a one-hot target G(d), KL(G || p) = sum_v G_v log(G_v / p_v) keeps
// only the v = d term, log(1 / p_d).
inline double OneHotKl(double target_logprob) { return -target_logprob; }

// CE(G, p) = -sum_v G_v log p_v = -log p_d.
inline double OneHotCrossEntropy(double target_logprob) {
  return -target_logprob;
}

inline double VanillaLoss(const ScoredContinuation& scored) {
  if (scored.tokens.empty()) throw EmptyText("no tokens to score");
  double sum = 0.0;
  for (const auto& t : scored.tokens) sum += OneHotCrossEntropy(t.logprob);
  return sum;
}

namespace detail {

inline void CheckAligned(const ScoredContinuation& scored,
                         const TokenLabeling& labels) {
  if (labels.labels.size() != scored.tokens.size()) {
    throw AlignmentError("labeling has " + std::to_string(labels.labels.size()) +
                         " entries for " + std::to_string(scored.tokens.size()) +
                         " tokens");
  }
}

}  // namespace detail

inline double FunctionalityLoss(const ScoredContinuation& scored,
                                const TokenLabeling& labels) {
  detail::CheckAligned(scored, labels);
  double sum = 0.0;
  for (size_t i = 0; i < scored.tokens.size(); ++i) {
    if (labels.labels[i] == SpanKind::kBenign) {
      sum += OneHotKl(scored.tokens[i].logprob);
    }
  }
  return sum;
}

inline double VulnerabilityLoss(const ScoredContinuation& scored,
                                const TokenLabeling& labels) {
  detail::CheckAligned(scored, labels);
  double sum = 0.0;
  for (size_t i = 0; i < scored.tokens.size(); ++i) {
    if (labels.labels[i] == SpanKind::kVulnerable) {
      sum += OneHotCrossEntropy(scored.tokens[i].logprob);
    }
  }
  return sum;
}

inline double CombinedLoss(double l_p, double l_q, const LossWeights& w) {
  w.Validate();
  return w.alpha * l_p + w.beta * l_q;
}

// Full breakdown for one scored target under `w`.
inline LossBreakdown Breakdown(const ScoredContinuation& scored,
                               const TokenLabeling& labels,
                               const LossWeights& w) {
  w.Validate();
  LossBreakdown out;
  for (size_t i = 0; i < scored.tokens.size(); ++i) {
    out.per_token.push_back(
        {i, labels.labels[i], -scored.tokens[i].logprob});
  }
  if (w.mode == LossMode::kVanilla) {
    out.alpha = out.beta = 1.0;
    out.l_p = VanillaLoss(scored);
    if (w.per_token_mean) out.l_p /= static_cast<double>(scored.tokens.size());
    out.l_q = 0.0;
    out.total = out.l_p;
    return out;
  }
  out.alpha = w.alpha;
  out.beta = w.beta;
  out.l_p = FunctionalityLoss(scored, labels);
  out.l_q = VulnerabilityLoss(scored, labels);
  if (w.per_token_mean) {
    const size_t k = labels.Count(SpanKind::kBenign);
    const size_t r = labels.Count(SpanKind::kVulnerable);
    if (k) out.l_p /= static_cast<double>(k);
    if (r) out.l_q /= static_cast<double>(r);
  }
  out.total = CombinedLoss(out.l_p, out.l_q, w);
  return out;
}

inline nlohmann::json LossTraceLine(int iteration, const std::string& genome_id,
                                    const LossBreakdown& b) {
  return {{"iteration", iteration},
          {"genome_id", genome_id},
          {"l_p", b.l_p},
          {"l_q", b.l_q},
          {"total", b.total}};
}

// Scores genomes against one (task, target) pair. Results are memoized on the
// rendered prompt plus target; lookups and inserts are thread-safe.
class FitnessEvaluator {
 public:
  FitnessEvaluator(ModelClient& client, std::string task, TargetCode target,
                   LossWeights weights)
      : client_(client),
        task_(std::move(task)),
        target_(std::move(target)),
        weights_(weights) {
    weights_.Validate();
  }

  LossBreakdown Evaluate(const PromptGenome& genome) {
    const std::string prompt = Render(genome, task_);
    const std::string key = prompt + '\x1f' + target_.code;
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) {
        ++hits_;
        return it->second;
      }
    }
    const auto scored = client_.Score(prompt, target_.code);
    const auto labels = LabelTokens(target_, scored);
    auto result = Breakdown(scored, labels, weights_);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(key, std::move(result)).first->second;
  }

  // Evaluates a population, fanning out over up to `max_threads` workers.
  // Output order matches input order.
  std::vector<LossBreakdown> EvaluateAll(const std::vector<PromptGenome>& genomes,
                                         size_t max_threads = 0) {
    if (max_threads == 0) {
      max_threads = std::max(1u, std::thread::hardware_concurrency());
    }
    std::vector<LossBreakdown> out(genomes.size());
    const size_t workers = std::min(max_threads, genomes.size());
    if (workers <= 1) {
      for (size_t i = 0; i < genomes.size(); ++i) out[i] = Evaluate(genomes[i]);
      return out;
    }
    std::atomic<size_t> next{0};
    std::vector<std::future<void>> jobs;
    for (size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&] {
        for (size_t i = next++; i < genomes.size(); i = next++) {
          out[i] = Evaluate(genomes[i]);
        }
      }));
    }
    for (auto& j : jobs) j.get();
    return out;
  }

  const std::string& task() const { return task_; }
  const TargetCode& target() const { return target_; }
  const LossWeights& weights() const { return weights_; }
  size_t cache_hits() const { return hits_.load(); }
  size_t cache_size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
  }

 private:
  ModelClient& client_;
  std::string task_;
  TargetCode target_;
  LossWeights weights_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, LossBreakdown> cache_;
  std::atomic<size_t> hits_{0};
};

}  // namespace deceptforge

#endif  // DECEPTFORGE_FITNESS_HPP_
