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

#ifndef DECEPTFORGE_EVOLVE_HPP_
#define DECEPTFORGE_EVOLVE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "deceptforge/case_spec.hpp"
#include "deceptforge/detect.hpp"
#include "deceptforge/errors.hpp"
#include "deceptforge/fitness.hpp"
#include "deceptforge/genome.hpp"
#include "deceptforge/lexicon.hpp"
#include "deceptforge/model_client.hpp"
#include "deceptforge/oracle.hpp"
#include "deceptforge/rng.hpp"
#include "json.hpp"

namespace deceptforge {

struct EvolutionConfig {
  int iterations = 150;
  int group_size = 100;
  double elite_fraction = 0.10;
  double crossover_prob = 0.6;
  int max_swap = 4;
  double mutation_prob = 0.01;  // per sentence
  int top_k_words = 30;
  double score_momentum = 0.5;
  uint64_t rng_seed = 0;
  LossWeights weights;

  // Stop once the greedy output of the best genome trips the detector this
  // many iterations in a row. Off gives a fixed-budget run.
  bool early_stop = true;
  int early_stop_hits = 3;
  double length_tolerance = 0.3;
  double loss_epsilon = 1e-6;
  int max_new_tokens = 256;
  size_t max_threads = 0;  // 0: hardware concurrency

  size_t EliteCount() const {
    return static_cast<size_t>(
        std::ceil(elite_fraction * static_cast<double>(group_size) - 1e-9));
  }

  void Validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError(std::string(name) + " must be in [0,1]");
      }
    };
    prob(elite_fraction, "elite_fraction");
    prob(crossover_prob, "crossover_prob");
    prob(mutation_prob, "mutation_prob");
    prob(score_momentum, "score_momentum");
    if (iterations < 0) throw ConfigError("iterations must be >= 0");
    if (group_size < 1) throw ConfigError("group_size must be >= 1");
    if (max_swap < 1) throw ConfigError("max_swap must be >= 1");
    if (top_k_words < 1) throw ConfigError("top_k_words must be >= 1");
    if (elite_fraction * group_size < 1.0 - 1e-9) {
      throw ConfigError("elite_fraction * group_size must be >= 1");
    }
    if (early_stop_hits < 1) throw ConfigError("early_stop_hits must be >= 1");
    if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
    weights.Validate();
  }

  nlohmann::json ToJson() const {
    return {{"iterations", iterations},
            {"group_size", group_size},
            {"elite_fraction", elite_fraction},
            {"crossover_prob", crossover_prob},
            {"max_swap", max_swap},
            {"mutation_prob", mutation_prob},
            {"top_k_words", top_k_words},
            {"score_momentum", score_momentum},
            {"rng_seed", rng_seed},
            {"weights",
             {{"alpha", weights.alpha},
              {"beta", weights.beta},
              {"mode", weights.mode == LossMode::kSplit ? "split" : "vanilla"},
              {"per_token_mean", weights.per_token_mean}}},
            {"early_stop", early_stop},
            {"early_stop_hits", early_stop_hits},
            {"length_tolerance", length_tolerance},
            {"loss_epsilon", loss_epsilon},
            {"max_new_tokens", max_new_tokens}};
  }

  // Missing keys keep their defaults.
  static EvolutionConfig FromJson(const nlohmann::json& j) {
    EvolutionConfig c;
    try {
      c.iterations = j.value("iterations", c.iterations);
      c.group_size = j.value("group_size", c.group_size);
      c.elite_fraction = j.value("elite_fraction", c.elite_fraction);
      c.crossover_prob = j.value("crossover_prob", c.crossover_prob);
      c.max_swap = j.value("max_swap", c.max_swap);
      c.mutation_prob = j.value("mutation_prob", c.mutation_prob);
      c.top_k_words = j.value("top_k_words", c.top_k_words);
      c.score_momentum = j.value("score_momentum", c.score_momentum);
      c.rng_seed = j.value("rng_seed", c.rng_seed);
      if (j.contains("weights")) {
        const auto& w = j["weights"];
        c.weights.alpha = w.value("alpha", c.weights.alpha);
        c.weights.beta = w.value("beta", c.weights.beta);
        const auto mode = w.value("mode", std::string("split"));
        if (mode == "split") {
          c.weights.mode = LossMode::kSplit;
        } else if (mode == "vanilla") {
          c.weights.mode = LossMode::kVanilla;
        } else {
          throw ConfigError("unknown loss mode '" + mode + "'");
        }
        c.weights.per_token_mean = w.value("per_token_mean", false);
      }
      c.early_stop = j.value("early_stop", c.early_stop);
      c.early_stop_hits = j.value("early_stop_hits", c.early_stop_hits);
      c.length_tolerance = j.value("length_tolerance", c.length_tolerance);
      c.loss_epsilon = j.value("loss_epsilon", c.loss_epsilon);
      c.max_new_tokens = j.value("max_new_tokens", c.max_new_tokens);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad evolution config: ") + e.what());
    }
    c.Validate();
    return c;
  }
};

struct ScoredGenome {
  PromptGenome genome;
  double loss = 0.0;
};

// ---------------------------------------------------------------- selection

// Roulette probabilities P_i = exp(-L_i) / sum_j exp(-L_j), shifted by the
// minimum loss for stability. Non-finite losses get probability zero.
inline std::vector<double> SelectionProbabilities(const std::vector<double>& losses) {
  double lo = std::numeric_limits<double>::infinity();
  for (double l : losses) {
    if (std::isfinite(l)) lo = std::min(lo, l);
  }
  if (!std::isfinite(lo)) throw SelectionError("no finite loss to select from");
  std::vector<double> p(losses.size(), 0.0);
  double total = 0.0;
  for (size_t i = 0; i < losses.size(); ++i) {
    if (std::isfinite(losses[i])) {
      p[i] = std::exp(-(losses[i] - lo));
      total += p[i];
    }
  }
  for (double& x : p) x /= total;
  return p;
}

struct Selection {
  std::vector<ScoredGenome> elites;
  std::vector<ScoredGenome> parents;  // ascending loss
};

inline std::vector<size_t> OrderByLoss(const std::vector<ScoredGenome>& pop) {
  std::vector<size_t> order(pop.size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto key = [&](size_t i) {
    const double l = pop[i].loss;
    return std::isnan(l) ? std::numeric_limits<double>::infinity() : l;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return key(a) < key(b); });
  return order;
}

// Keeps the lowest-loss elites, then draws enough parents (with replacement)
// from the rest to refill group_size.
inline Selection Select(const std::vector<ScoredGenome>& population,
                        const EvolutionConfig& cfg, Rng& rng) {
  if (population.empty()) throw SelectionError("empty population");
  const auto order = OrderByLoss(population);
  if (!std::isfinite(population[order.front()].loss)) {
    throw SelectionError("every loss is infinite");
  }
  const size_t group = static_cast<size_t>(cfg.group_size);
  const size_t n_elite = std::min({cfg.EliteCount(), population.size(), group});
  Selection out;
  for (size_t i = 0; i < n_elite; ++i) out.elites.push_back(population[order[i]]);

  std::vector<size_t> pool(order.begin() + static_cast<long>(n_elite), order.end());
  if (pool.empty()) pool = order;
  std::vector<double> pool_losses;
  for (size_t i : pool) pool_losses.push_back(population[i].loss);
  const auto probs = SelectionProbabilities(pool_losses);
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());

  std::vector<size_t> drawn;
  for (size_t k = n_elite; k < group; ++k) {
    const double u = rng.Uniform();
    size_t j = static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                   cdf.begin());
    // u can land past the last cdf entry through rounding.
    if (j >= probs.size()) {
      j = probs.size() - 1;
      while (j > 0 && probs[j] == 0.0) --j;
    }
    drawn.push_back(j);
  }
  // Pool is already loss-ordered, so sorting pool positions sorts by loss.
  std::sort(drawn.begin(), drawn.end());
  for (size_t j : drawn) out.parents.push_back(population[pool[j]]);
  return out;
}

// ---------------------------------------------------------------- crossover

// k distinct indices from [0, n), uniformly.
inline std::set<size_t> SampleIndices(size_t n, size_t k, Rng& rng) {
  std::vector<size_t> all(n);
  std::iota(all.begin(), all.end(), size_t{0});
  for (size_t i = 0; i < k; ++i) {
    const size_t j = static_cast<size_t>(rng.UniformInt(i, n - 1));
    std::swap(all[i], all[j]);
  }
  return {all.begin(), all.begin() + static_cast<long>(k)};
}

// Crosses neighbor pairs (p1,p2), (p3,p4), ... of loss-sorted parents. Each
// pair swaps 1..max_swap sentence positions with probability crossover_prob;
// an odd trailing parent passes through.
inline std::vector<PromptGenome> CrossoverPopulation(
    const std::vector<PromptGenome>& parents, const EvolutionConfig& cfg,
    Rng& rng) {
  std::vector<PromptGenome> out;
  out.reserve(parents.size());
  size_t i = 0;
  for (; i + 1 < parents.size(); i += 2) {
    const auto& a = parents[i];
    const auto& b = parents[i + 1];
    if (!rng.Bernoulli(cfg.crossover_prob)) {
      out.push_back(a);
      out.push_back(b);
      continue;
    }
    const size_t len = std::min(a.size(), b.size());
    const size_t cap = std::min(static_cast<size_t>(cfg.max_swap), len);
    const size_t k = static_cast<size_t>(rng.UniformInt(1, cap));
    auto [x, y] = SwapSentences(a, b, SampleIndices(len, k, rng),
                                static_cast<size_t>(cfg.max_swap));
    out.push_back(std::move(x));
    out.push_back(std::move(y));
  }
  if (i < parents.size()) out.push_back(parents[i]);
  return out;
}

// ------------------------------------------------------ word-level scoring

struct WordScore {
  double current = 0.0;
  double previous = 0.0;
  double final_score = 0.0;
};

class WordScoreTable {
 public:
  const std::map<std::string, WordScore>& scores() const { return scores_; }
  bool empty() const { return scores_.empty(); }

  std::optional<double> Score(const std::string& w) const {
    auto it = scores_.find(w);
    if (it == scores_.end()) return std::nullopt;
    return it->second.final_score;
  }

  double Median() const {
    if (scores_.empty()) return 0.0;
    std::vector<double> v;
    for (const auto& [w, s] : scores_) v.push_back(s.final_score);
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }

  // K highest final scores; ties broken alphabetically.
  std::vector<std::string> TopK(size_t k) const {
    std::vector<std::pair<std::string, double>> v;
    for (const auto& [w, s] : scores_) v.emplace_back(w, s.final_score);
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      return a.second > b.second;
    });
    std::vector<std::string> out;
    for (size_t i = 0; i < std::min(k, v.size()); ++i) out.push_back(v[i].first);
    return out;
  }

  void Set(const std::string& w, WordScore s) { scores_[w] = s; }

 private:
  std::map<std::string, WordScore> scores_;
};

// Each occurrence of w in a genome with loss L contributes 1/L; a word's
// current score is the mean over its occurrences in the population. Words
// seen before blend with their last final score; first sightings have no
// history, so their previous score is taken as the current one.
inline WordScoreTable UpdateWordScores(const WordScoreTable& table,
                                       const std::vector<ScoredGenome>& population,
                                       double momentum, double epsilon = 1e-6) {
  std::map<std::string, std::pair<double, size_t>> acc;
  for (const auto& sg : population) {
    const double inv = 1.0 / std::max(sg.loss, epsilon);
    for (const auto& occ : WordOccurrences(sg.genome)) {
      auto& [sum, count] = acc[occ.word];
      sum += inv;
      ++count;
    }
  }
  WordScoreTable out = table;
  for (const auto& [word, sc] : acc) {
    WordScore s;
    s.current = sc.first / static_cast<double>(sc.second);
    auto old = table.scores().find(word);
    s.previous = old == table.scores().end() ? s.current : old->second.final_score;
    s.final_score = momentum * s.current + (1.0 - momentum) * s.previous;
    out.Set(word, s);
  }
  return out;
}

// Probability of swapping a word scored `original` for a synonym scored
// `candidate`.
inline double SubstitutionProbability(double candidate, double original) {
  const double total = candidate + original;
  return total > 0.0 ? candidate / total : 0.5;
}

// Replaces words with higher-ranked synonyms from the top-K dictionary.
inline PromptGenome SubstituteWords(const PromptGenome& genome,
                                    const WordScoreTable& table,
                                    const SynonymLexicon& lexicon,
                                    const EvolutionConfig& cfg, Rng& rng) {
  const auto dictionary = table.TopK(static_cast<size_t>(cfg.top_k_words));
  if (dictionary.empty() || lexicon.empty()) return genome;
  const double fallback = table.Median();

  auto sentences = genome.sentences();
  // Per-sentence list of (begin, end, replacement), applied back to front.
  std::vector<std::vector<std::tuple<size_t, size_t, std::string>>> edits(
      sentences.size());
  for (const auto& occ : WordOccurrences(genome)) {
    if (!lexicon.Contains(occ.word)) continue;
    const std::string* best = nullptr;
    double best_score = -1.0;
    for (const auto& s : dictionary) {
      if (!lexicon.AreSynonyms(occ.word, s)) continue;
      const double sc = *table.Score(s);
      if (sc > best_score) {
        best = &s;
        best_score = sc;
      }
    }
    if (!best) continue;
    const double own = table.Score(occ.word).value_or(fallback);
    if (!rng.Bernoulli(SubstitutionProbability(best_score, own))) continue;
    const auto& sentence = sentences[occ.sentence_index];
    edits[occ.sentence_index].emplace_back(
        occ.begin, occ.end,
        MatchCase(std::string_view(sentence).substr(occ.begin, occ.end - occ.begin),
                  *best));
  }
  for (size_t s = 0; s < sentences.size(); ++s) {
    for (auto it = edits[s].rbegin(); it != edits[s].rend(); ++it) {
      const auto& [b, e, word] = *it;
      sentences[s].replace(b, e - b, word);
    }
  }
  return genome.WithSentences(std::move(sentences));
}

// --------------------------------------------------------------- mutation

// Paraphrases each sentence independently with probability mutation_prob.
// Oracle failures leave the sentence as it was.
inline std::vector<PromptGenome> MutatePopulation(
    const std::vector<PromptGenome>& offspring, ParaphraseOracle& oracle,
    const EvolutionConfig& cfg, Rng& rng) {
  std::vector<PromptGenome> out;
  out.reserve(offspring.size());
  for (const auto& g : offspring) {
    auto sentences = g.sentences();
    bool changed = false;
    for (auto& s : sentences) {
      if (!rng.Bernoulli(cfg.mutation_prob)) continue;
      try {
        auto rewritten = Paraphrase(
            oracle, {s, ParaphraseMode::kSentence, cfg.length_tolerance});
        if (rewritten != s) {
          s = std::move(rewritten);
          changed = true;
        }
      } catch (const TransportError&) {
      }
    }
    out.push_back(changed ? g.WithSentences(std::move(sentences)) : g);
  }
  return out;
}

// -------------------------------------------------------------- the loop

struct IterationRecord {
  int iteration = 0;
  double best_total = 0.0;
  double mean_total = 0.0;
  std::string best_genome_id;
  size_t population_size = 0;
  bool greedy_hit = false;
};

struct GenomeLoss {
  int iteration = 0;
  std::string genome_id;
  LossBreakdown loss;
};

struct AttackResult {
  PromptGenome best_genome{{"."}, Attachment::kPrefix};
  LossBreakdown best_loss;
  std::vector<IterationRecord> trace;
  std::vector<GenomeLoss> genome_losses;
  bool success = false;
  int iterations_used = 0;
  bool stopped_early = false;
  std::string greedy_output;
  DetectionVerdict verdict;
  // Set when the run aborted; the trace up to that point is kept.
  std::string error;
};

// Population state after evaluation, handed to observers once per iteration.
struct IterationSnapshot {
  int iteration = 0;
  const std::vector<ScoredGenome>* population = nullptr;
};

using IterationObserver = std::function<void(const IterationSnapshot&)>;

inline nlohmann::json GenomeJson(const PromptGenome& g) {
  return {{"id", g.id()},
          {"attachment", AttachmentName(g.attachment())},
          {"sentences", g.sentences()},
          {"text", g.Text()}};
}

inline nlohmann::json AttackResultJson(const AttackResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"iteration", t.iteration},
                     {"best_total", t.best_total},
                     {"mean_total", t.mean_total},
                     {"best_genome_id", t.best_genome_id},
                     {"population_size", t.population_size},
                     {"greedy_hit", t.greedy_hit}});
  }
  nlohmann::json matched = nlohmann::json::array();
  for (const auto& m : r.verdict.matched) {
    matched.push_back({{"pattern", m.pattern}, {"start", m.begin}, {"end", m.end}});
  }
  return {{"best_genome", GenomeJson(r.best_genome)},
          {"best_loss",
           {{"l_p", r.best_loss.l_p},
            {"l_q", r.best_loss.l_q},
            {"total", r.best_loss.total},
            {"alpha", r.best_loss.alpha},
            {"beta", r.best_loss.beta}}},
          {"success", r.success},
          {"iterations_used", r.iterations_used},
          {"stopped_early", r.stopped_early},
          {"greedy_output", r.greedy_output},
          {"verdict",
           {{"vulnerable", r.verdict.vulnerable},
            {"needs_review", r.verdict.needs_review},
            {"matched", matched}}},
          {"error", r.error},
          {"trace", trace}};
}

// Seed group, then {evaluate, select, crossover, substitute, mutate} until
// the budget runs out or the detector fires on the greedy output of the best
// genome `early_stop_hits` iterations in a row. Reproducible from rng_seed
// against deterministic backends. Client errors propagate; when `partial` is
// given it receives the trace gathered before the failure.
inline AttackResult RunAttack(const CaseSpec& c, const EvolutionConfig& cfg,
                              ModelClient& model, ParaphraseOracle& oracle,
                              const SynonymLexicon& lexicon,
                              const PatternLibrary& patterns,
                              const IterationObserver& observer = {},
                              AttackResult* partial = nullptr) {
  cfg.Validate();
  if (auto problems = c.Problems(); !problems.empty()) {
    throw ConfigError("case " + c.id + " is invalid: " + problems.front());
  }
  const auto& detector = patterns.Get(c.detector_id);
  FitnessEvaluator evaluator(model, c.task, c.BuildTarget(), cfg.weights);
  StubOracle fallback(lexicon);

  AttackResult result;
  std::map<std::string, std::string> greedy_cache;
  auto greedy = [&](const PromptGenome& g) -> const std::string& {
    const auto prompt = Render(g, c.task);
    auto it = greedy_cache.find(prompt);
    if (it == greedy_cache.end()) {
      auto out = model.Generate(prompt, SamplingParams::Greedy(cfg.max_new_tokens));
      it = greedy_cache.emplace(prompt, out.empty() ? "" : out.front()).first;
    }
    return it->second;
  };

  std::vector<PromptGenome> population =
      SeedGroup(c.SeedGenome(), static_cast<size_t>(cfg.group_size), oracle,
                fallback, cfg.length_tolerance);
  WordScoreTable words;
  bool have_best = false;
  int consecutive_hits = 0;

  try {
    for (int t = 0;; ++t) {
      const auto losses = evaluator.EvaluateAll(population, cfg.max_threads);
      std::vector<ScoredGenome> scored;
      scored.reserve(population.size());
      IterationRecord rec;
      rec.iteration = t;
      rec.population_size = population.size();
      size_t best_i = 0;
      double sum = 0.0;
      for (size_t i = 0; i < population.size(); ++i) {
        scored.push_back({population[i], losses[i].total});
        result.genome_losses.push_back({t, population[i].id(), losses[i]});
        sum += losses[i].total;
        if (losses[i].total < losses[best_i].total) best_i = i;
      }
      rec.best_total = losses[best_i].total;
      rec.mean_total = sum / static_cast<double>(population.size());
      rec.best_genome_id = population[best_i].id();
      if (!have_best || losses[best_i].total < result.best_loss.total) {
        result.best_genome = population[best_i];
        result.best_loss = losses[best_i];
        have_best = true;
      }
      rec.greedy_hit = detector.Scan(greedy(population[best_i])).vulnerable;
      consecutive_hits = rec.greedy_hit ? consecutive_hits + 1 : 0;
      result.trace.push_back(rec);
      if (observer) observer({t, &scored});

      if (cfg.early_stop && consecutive_hits >= cfg.early_stop_hits) {
        result.stopped_early = true;
        break;
      }
      if (t >= cfg.iterations) break;

      words = UpdateWordScores(words, scored, cfg.score_momentum, cfg.loss_epsilon);
      Rng select_rng = Rng::Stream(cfg.rng_seed, "select", static_cast<uint64_t>(t));
      Rng cross_rng = Rng::Stream(cfg.rng_seed, "crossover", static_cast<uint64_t>(t));
      Rng subst_rng = Rng::Stream(cfg.rng_seed, "substitute", static_cast<uint64_t>(t));
      Rng mutate_rng = Rng::Stream(cfg.rng_seed, "mutate", static_cast<uint64_t>(t));

      auto sel = Select(scored, cfg, select_rng);
      std::vector<PromptGenome> parents;
      for (auto& p : sel.parents) parents.push_back(std::move(p.genome));
      auto offspring = CrossoverPopulation(parents, cfg, cross_rng);
      for (auto& g : offspring) {
        g = SubstituteWords(g, words, lexicon, cfg, subst_rng);
      }
      offspring = MutatePopulation(offspring, oracle, cfg, mutate_rng);

      population.clear();
      for (auto& e : sel.elites) population.push_back(std::move(e.genome));
      for (size_t k = 0; k < offspring.size(); ++k) {
        population.push_back(offspring[k].WithId("g" + std::to_string(t + 1) + "-" +
                                                 std::to_string(k)));
      }
      result.iterations_used = t + 1;
    }
  } catch (const Error& e) {
    result.error = e.what();
    if (partial) *partial = result;
    throw;
  }

  result.greedy_output = greedy(result.best_genome);
  result.verdict = detector.Scan(result.greedy_output);
  result.success = result.verdict.vulnerable;
  return result;
}

}  // namespace deceptforge

#endif  // DECEPTFORGE_EVOLVE_HPP_
