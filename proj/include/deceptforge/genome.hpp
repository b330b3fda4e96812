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

#ifndef DECEPTFORGE_GENOME_HPP_
#define DECEPTFORGE_GENOME_HPP_

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/text.hpp"

namespace deceptforge {

enum class Attachment { kPrefix, kSuffix };

inline std::string_view AttachmentName(Attachment a) {
  return a == Attachment::kPrefix ? "prefix" : "suffix";
}

inline Attachment ParseAttachment(std::string_view s) {
  if (s == "prefix") return Attachment::kPrefix;
  if (s == "suffix") return Attachment::kSuffix;
  throw ConfigError("unknown attachment '" + std::string(s) + "'");
}

// Splits free text into sentences. A sentence ends at '.', '!' or '?' that is
// followed by whitespace or the end of the text; the terminator stays with its
// sentence. No abbreviation handling.
inline std::vector<std::string> ParseSentences(std::string_view input) {
  const std::string_view body = text::Trim(input);
  if (body.empty()) throw EmptyText("cannot split empty text into sentences");
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < body.size() && !text::IsSpace(body[i + 1])) continue;
    auto sentence = text::Trim(body.substr(start, i + 1 - start));
    if (!sentence.empty()) out.emplace_back(sentence);
    start = i + 1;
  }
  auto tail = text::Trim(body.substr(std::min(start, body.size())));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

// A prefix or suffix prompt: the unit of evolution. Immutable once built.
class PromptGenome {
 public:
  PromptGenome(std::vector<std::string> sentences, Attachment attachment,
               std::string id = {})
      : sentences_(std::move(sentences)),
        attachment_(attachment),
        id_(std::move(id)) {
    if (sentences_.empty()) throw EmptyText("genome needs at least one sentence");
    for (const auto& s : sentences_) {
      if (text::Trim(s).empty()) throw EmptyText("genome sentence is blank");
    }
  }

  static PromptGenome FromText(std::string_view body, Attachment attachment,
                               std::string id = {}) {
    return PromptGenome(ParseSentences(body), attachment, std::move(id));
  }

  const std::vector<std::string>& sentences() const { return sentences_; }
  size_t size() const { return sentences_.size(); }
  Attachment attachment() const { return attachment_; }
  const std::string& id() const { return id_; }

  // Sentences joined by single spaces.
  std::string Text() const { return text::Join(sentences_, " "); }

  PromptGenome WithId(std::string id) const {
    PromptGenome g = *this;
    g.id_ = std::move(id);
    return g;
  }

  PromptGenome WithSentences(std::vector<std::string> sentences) const {
    return PromptGenome(std::move(sentences), attachment_, id_);
  }

  friend bool operator==(const PromptGenome& a, const PromptGenome& b) {
    return a.sentences_ == b.sentences_ && a.attachment_ == b.attachment_;
  }

 private:
  std::vector<std::string> sentences_;
  Attachment attachment_;
  std::string id_;
};

// Full victim prompt. Prefix goes before the task, suffix after; one space
// separates them.
inline std::string Render(const PromptGenome& genome, std::string_view task) {
  if (text::Trim(task).empty()) throw EmptyText("task text is empty");
  const std::string body = genome.Text();
  std::string out;
  if (genome.attachment() == Attachment::kPrefix) {
    out.reserve(body.size() + task.size() + 1);
    out.append(body).append(" ").append(task);
  } else {
    out.reserve(body.size() + task.size() + 1);
    out.append(task).append(" ").append(body);
  }
  return out;
}

// Exchanges sentence i of `a` and `b` for every i in `indices`. Inputs are
// left untouched.
inline std::pair<PromptGenome, PromptGenome> SwapSentences(
    const PromptGenome& a, const PromptGenome& b,
    const std::set<size_t>& indices, size_t max_swap) {
  if (indices.size() > max_swap) {
    throw IndexError("swap of " + std::to_string(indices.size()) +
                     " sentences exceeds max_swap " + std::to_string(max_swap));
  }
  auto sa = a.sentences();
  auto sb = b.sentences();
  for (size_t i : indices) {
    if (i >= sa.size() || i >= sb.size()) {
      throw IndexError("sentence index " + std::to_string(i) +
                       " out of range");
    }
    std::swap(sa[i], sb[i]);
  }
  return {a.WithSentences(std::move(sa)), b.WithSentences(std::move(sb))};
}

struct WordOccurrence {
  std::string word;  // lowercase
  size_t sentence_index = 0;
  size_t word_index = 0;
  // Byte range of the word inside its sentence.
  size_t begin = 0;
  size_t end = 0;

  friend bool operator==(const WordOccurrence&, const WordOccurrence&) = default;
};

inline std::vector<WordOccurrence> WordOccurrences(const PromptGenome& genome) {
  std::vector<WordOccurrence> out;
  const auto& sentences = genome.sentences();
  for (size_t s = 0; s < sentences.size(); ++s) {
    const auto runs = text::AlphaRuns(sentences[s]);
    for (size_t w = 0; w < runs.size(); ++w) {
      const auto& r = runs[w];
      out.push_back({text::ToLower(std::string_view(sentences[s])
                                       .substr(r.begin, r.end - r.begin)),
                     s, w, r.begin, r.end});
    }
  }
  return out;
}

}  // namespace deceptforge

#endif  // DECEPTFORGE_GENOME_HPP_
