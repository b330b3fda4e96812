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

#ifndef DECEPTFORGE_SCORED_HPP_
#define DECEPTFORGE_SCORED_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace deceptforge {

// One teacher-forced token. `start`/`end` are UTF-8 byte offsets into the
// continuation text; `logprob` is the natural-log probability of the token
// given the prompt and every preceding continuation token.
struct ScoredToken {
  std::string text;
  size_t start = 0;
  size_t end = 0;
  double logprob = 0.0;

  friend bool operator==(const ScoredToken&, const ScoredToken&) = default;
};

struct ScoredContinuation {
  std::string continuation_text;
  std::vector<ScoredToken> tokens;

  friend bool operator==(const ScoredContinuation&,
                         const ScoredContinuation&) = default;
};

// Empty string when the spans tile the text in order and every logprob is a
// valid log probability; otherwise a description of the first problem.
inline std::string CheckScoredContinuation(const ScoredContinuation& sc) {
  size_t cursor = 0;
  for (size_t i = 0; i < sc.tokens.size(); ++i) {
    const auto& t = sc.tokens[i];
    if (t.start != cursor) {
      return "token " + std::to_string(i) + " starts at " +
             std::to_string(t.start) + ", expected " + std::to_string(cursor);
    }
    if (t.end < t.start || t.end > sc.continuation_text.size()) {
      return "token " + std::to_string(i) + " has a bad end offset";
    }
    if (sc.continuation_text.compare(t.start, t.end - t.start, t.text) != 0) {
      return "token " + std::to_string(i) + " text does not match its span";
    }
    if (!(t.logprob <= 0.0)) {
      return "token " + std::to_string(i) + " has logprob > 0 or NaN";
    }
    cursor = t.end;
  }
  if (cursor != sc.continuation_text.size()) {
    return "tokens cover " + std::to_string(cursor) + " of " +
           std::to_string(sc.continuation_text.size()) + " bytes";
  }
  return {};
}

}  // namespace deceptforge

#endif  // DECEPTFORGE_SCORED_HPP_
