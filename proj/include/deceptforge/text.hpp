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

#ifndef DECEPTFORGE_TEXT_HPP_
#define DECEPTFORGE_TEXT_HPP_

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace deceptforge::text {

inline bool IsSpace(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

// ASCII letters only; bytes of multi-byte UTF-8 sequences are separators.
inline bool IsAlpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline std::string_view Trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && IsSpace(s[b])) ++b;
  while (e > b && IsSpace(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Byte range [begin, end) of a maximal alphabetic run.
struct WordSpan {
  size_t begin = 0;
  size_t end = 0;
};

inline std::vector<WordSpan> AlphaRuns(std::string_view s) {
  std::vector<WordSpan> runs;
  size_t i = 0;
  while (i < s.size()) {
    if (!IsAlpha(s[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < s.size() && IsAlpha(s[j])) ++j;
    runs.push_back({i, j});
    i = j;
  }
  return runs;
}

// Lowercased alphabetic runs of `s`, in document order.
inline std::vector<std::string> LowerWords(std::string_view s) {
  std::vector<std::string> words;
  for (const auto& r : AlphaRuns(s)) {
    words.push_back(ToLower(s.substr(r.begin, r.end - r.begin)));
  }
  return words;
}

// Whitespace-delimited pieces with their byte offsets.
struct Piece {
  std::string_view text;
  size_t begin = 0;
  size_t end = 0;
};

inline std::vector<Piece> WhitespacePieces(std::string_view s) {
  std::vector<Piece> pieces;
  size_t i = 0;
  while (i < s.size()) {
    if (IsSpace(s[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < s.size() && !IsSpace(s[j])) ++j;
    pieces.push_back({s.substr(i, j - i), i, j});
    i = j;
  }
  return pieces;
}

inline size_t CountWords(std::string_view s) { return AlphaRuns(s).size(); }

inline std::string Join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace deceptforge::text

#endif  // DECEPTFORGE_TEXT_HPP_
