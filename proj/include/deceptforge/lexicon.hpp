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

#ifndef DECEPTFORGE_LEXICON_HPP_
#define DECEPTFORGE_LEXICON_HPP_

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/text.hpp"
#include "json.hpp"

namespace deceptforge {

// Synonym rings. Each file entry `word: [s1, s2, ...]` defines the ring
// word -> s1 -> s2 -> ... -> word. Two words are synonyms iff they share a
// ring. A word may belong to at most one ring.
class SynonymLexicon {
 public:
  SynonymLexicon() = default;

  explicit SynonymLexicon(const std::map<std::string, std::vector<std::string>>& entries) {
    for (const auto& [head, syns] : entries) {
      std::vector<std::string> ring{head};
      ring.insert(ring.end(), syns.begin(), syns.end());
      const size_t id = rings_.size();
      for (size_t i = 0; i < ring.size(); ++i) {
        const auto& w = ring[i];
        if (w.empty() || text::ToLower(w) != w ||
            !std::all_of(w.begin(), w.end(), text::IsAlpha)) {
          throw ConfigError("lexicon word '" + w +
                            "' must be a lowercase alphabetic word");
        }
        if (!position_.emplace(w, std::make_pair(id, i)).second) {
          throw ConfigError("lexicon word '" + w + "' appears in two rings");
        }
      }
      rings_.push_back(std::move(ring));
    }
    entries_ = entries;
  }

  static SynonymLexicon FromJson(const nlohmann::json& j) {
    try {
      return SynonymLexicon(j.get<std::map<std::string, std::vector<std::string>>>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad lexicon: ") + e.what());
    }
  }

  static SynonymLexicon Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lexicon " + path);
    try {
      return FromJson(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("lexicon " + path + ": " + e.what());
    }
  }

  nlohmann::json ToJson() const { return nlohmann::json(entries_); }

  bool empty() const { return rings_.empty(); }
  bool Contains(std::string_view w) const {
    return position_.count(std::string(w)) != 0;
  }

  // Next word around the ring, or nullopt for unknown words.
  std::optional<std::string> Next(std::string_view w) const {
    auto it = position_.find(std::string(w));
    if (it == position_.end()) return std::nullopt;
    const auto& ring = rings_[it->second.first];
    return ring[(it->second.second + 1) % ring.size()];
  }

  bool AreSynonyms(std::string_view a, std::string_view b) const {
    if (a == b) return false;
    auto ia = position_.find(std::string(a));
    auto ib = position_.find(std::string(b));
    return ia != position_.end() && ib != position_.end() &&
           ia->second.first == ib->second.first;
  }

  // Ring members other than `w`, in ring order starting after `w`.
  std::vector<std::string> SynonymsOf(std::string_view w) const {
    auto it = position_.find(std::string(w));
    if (it == position_.end()) return {};
    const auto& ring = rings_[it->second.first];
    std::vector<std::string> out;
    for (size_t k = 1; k < ring.size(); ++k) {
      out.push_back(ring[(it->second.second + k) % ring.size()]);
    }
    return out;
  }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
  std::vector<std::vector<std::string>> rings_;
  std::unordered_map<std::string, std::pair<size_t, size_t>> position_;
};

// Copies the capitalization pattern of `like` onto lowercase `word`.
inline std::string MatchCase(std::string_view like, std::string word) {
  const bool all_upper =
      like.size() > 1 &&
      std::all_of(like.begin(), like.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
  if (all_upper) {
    for (char& c : word) c = static_cast<char>(c - 'a' + 'A');
  } else if (!like.empty() && like[0] >= 'A' && like[0] <= 'Z' && !word.empty()) {
    word[0] = static_cast<char>(word[0] - 'a' + 'A');
  }
  return word;
}

}  // namespace deceptforge

#endif  // DECEPTFORGE_LEXICON_HPP_
