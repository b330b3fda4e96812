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

#ifndef DECEPTFORGE_TARGET_HPP_
#define DECEPTFORGE_TARGET_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/scored.hpp"

namespace deceptforge {

enum class SpanKind { kBenign, kVulnerable };
enum class EditKind { kDelete, kReplace, kInsert };
enum class Language { kC, kPython };
enum class InjectionMethod { kDelete, kChange, kAdd };

inline std::string_view SpanKindName(SpanKind k) {
  return k == SpanKind::kBenign ? "benign" : "vulnerable";
}
inline std::string_view EditKindName(EditKind k) {
  switch (k) {
    case EditKind::kDelete: return "delete";
    case EditKind::kReplace: return "replace";
    case EditKind::kInsert: return "insert";
  }
  return "?";
}
inline std::string_view LanguageName(Language l) {
  return l == Language::kC ? "c" : "python";
}
inline std::string_view InjectionMethodName(InjectionMethod m) {
  switch (m) {
    case InjectionMethod::kDelete: return "delete";
    case InjectionMethod::kChange: return "change";
    case InjectionMethod::kAdd: return "add";
  }
  return "?";
}

inline SpanKind ParseSpanKind(std::string_view s) {
  if (s == "benign") return SpanKind::kBenign;
  if (s == "vulnerable") return SpanKind::kVulnerable;
  throw ConfigError("unknown span kind '" + std::string(s) + "'");
}
inline EditKind ParseEditKind(std::string_view s) {
  if (s == "delete") return EditKind::kDelete;
  if (s == "replace") return EditKind::kReplace;
  if (s == "insert") return EditKind::kInsert;
  throw ConfigError("unknown edit op '" + std::string(s) + "'");
}
inline Language ParseLanguage(std::string_view s) {
  if (s == "c") return Language::kC;
  if (s == "python") return Language::kPython;
  throw ConfigError("unknown language '" + std::string(s) + "'");
}

struct Range {
  size_t begin = 0;
  size_t end = 0;  // exclusive

  bool Overlaps(const Range& o) const { return begin < o.end && o.begin < end; }
  friend bool operator==(const Range&, const Range&) = default;
};

inline std::string RangeString(const Range& r) {
  return "[" + std::to_string(r.begin) + "," + std::to_string(r.end) + ")";
}

// One edit on the secure solution, in original-text byte offsets.
struct EditOp {
  EditKind op = EditKind::kReplace;
  size_t start = 0;
  size_t end = 0;
  std::string text;
  SpanKind kind = SpanKind::kVulnerable;
  // Post-edit range labeled vulnerable. Lets deletions, which leave no new
  // text behind, still name concrete target tokens.
  std::optional<Range> anchor_range;
};

struct Segment {
  Range range;
  SpanKind kind = SpanKind::kBenign;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct TargetCode {
  std::string code;
  Language language = Language::kC;
  std::vector<Segment> segments;
  std::string cwe_id;
  InjectionMethod injection_method = InjectionMethod::kChange;

  std::vector<Range> VulnerableRanges() const {
    std::vector<Range> out;
    for (const auto& s : segments) {
      if (s.kind == SpanKind::kVulnerable) out.push_back(s.range);
    }
    return out;
  }
};

namespace detail {

inline void AppendSegment(std::vector<Segment>& segs, Range r, SpanKind kind) {
  if (r.begin == r.end) return;
  if (!segs.empty() && segs.back().kind == kind &&
      segs.back().range.end == r.begin) {
    segs.back().range.end = r.end;
    return;
  }
  segs.push_back({r, kind});
}

// Relabels `r` in an ordered, covering segment list.
inline std::vector<Segment> Relabel(const std::vector<Segment>& segs, Range r,
                                    SpanKind kind) {
  std::vector<Segment> out;
  for (const auto& s : segs) {
    if (!s.range.Overlaps(r)) {
      AppendSegment(out, s.range, s.kind);
      continue;
    }
    AppendSegment(out, {s.range.begin, std::max(s.range.begin, r.begin)},
                  s.kind);
    AppendSegment(out,
                  {std::max(s.range.begin, r.begin), std::min(s.range.end, r.end)},
                  kind);
    AppendSegment(out, {std::min(s.range.end, r.end), s.range.end}, s.kind);
  }
  return out;
}

inline InjectionMethod MethodFor(EditKind op) {
  switch (op) {
    case EditKind::kDelete: return InjectionMethod::kDelete;
    case EditKind::kReplace: return InjectionMethod::kChange;
    case EditKind::kInsert: return InjectionMethod::kAdd;
  }
  return InjectionMethod::kChange;
}

}  // namespace detail

// Injects the vulnerability into a secure solution. Offsets refer to the
// original text, so the edit list may come in any order. Text introduced by
// vulnerable edits (plus any anchor ranges) becomes the vulnerable segments;
// everything else is benign.
inline TargetCode ApplyEdits(std::string_view solution_code,
                             std::vector<EditOp> edits) {
  for (const auto& e : edits) {
    if (e.start > e.end || e.end > solution_code.size()) {
      throw RangeError("edit " + RangeString({e.start, e.end}) +
                       " outside solution of length " +
                       std::to_string(solution_code.size()));
    }
    if (e.op == EditKind::kDelete && !e.text.empty()) {
      throw ConfigError("delete edit must carry empty text");
    }
    if (e.op == EditKind::kInsert && e.start != e.end) {
      throw ConfigError("insert edit must have start == end");
    }
  }
  std::vector<size_t> order(edits.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (edits[a].start != edits[b].start) return edits[a].start < edits[b].start;
    return edits[a].end < edits[b].end;
  });
  for (size_t k = 1; k < order.size(); ++k) {
    const auto& prev = edits[order[k - 1]];
    const auto& next = edits[order[k]];
    const bool both_insert_same_point = prev.op == EditKind::kInsert &&
                                        next.op == EditKind::kInsert &&
                                        prev.start == next.start;
    if (next.start < prev.end || both_insert_same_point) {
      throw OverlapError("edits " + RangeString({prev.start, prev.end}) +
                         " and " + RangeString({next.start, next.end}) +
                         " overlap");
    }
  }

  TargetCode out;
  std::vector<Segment> segs;
  size_t cursor = 0;
  for (size_t idx : order) {
    const auto& e = edits[idx];
    const size_t keep_begin = out.code.size();
    out.code.append(solution_code.substr(cursor, e.start - cursor));
    detail::AppendSegment(segs, {keep_begin, out.code.size()}, SpanKind::kBenign);
    const size_t new_begin = out.code.size();
    out.code.append(e.text);
    detail::AppendSegment(segs, {new_begin, out.code.size()}, e.kind);
    cursor = e.end;
  }
  const size_t tail_begin = out.code.size();
  out.code.append(solution_code.substr(cursor));
  detail::AppendSegment(segs, {tail_begin, out.code.size()}, SpanKind::kBenign);

  for (const auto& e : edits) {
    if (!e.anchor_range) continue;
    const Range r = *e.anchor_range;
    if (r.begin >= r.end || r.end > out.code.size()) {
      throw RangeError("anchor range " + RangeString(r) +
                       " outside target of length " +
                       std::to_string(out.code.size()));
    }
    segs = detail::Relabel(segs, r, SpanKind::kVulnerable);
  }
  out.segments = std::move(segs);

  out.injection_method = InjectionMethod::kChange;
  for (const auto& e : edits) {
    if (e.kind == SpanKind::kVulnerable) {
      out.injection_method = detail::MethodFor(e.op);
      break;
    }
  }
  return out;
}

struct TokenLabeling {
  std::vector<SpanKind> labels;

  size_t Count(SpanKind k) const {
    return static_cast<size_t>(std::count(labels.begin(), labels.end(), k));
  }
};

// A token is vulnerable iff its span overlaps any vulnerable segment.
inline TokenLabeling LabelTokens(const TargetCode& target,
                                 const ScoredContinuation& scored) {
  if (scored.continuation_text != target.code) {
    throw AlignmentError("scored continuation does not match target code");
  }
  const auto vulnerable = target.VulnerableRanges();
  TokenLabeling out;
  out.labels.reserve(scored.tokens.size());
  for (const auto& tok : scored.tokens) {
    const Range tr{tok.start, tok.end};
    const bool hit = std::any_of(vulnerable.begin(), vulnerable.end(),
                                 [&](const Range& r) { return r.Overlaps(tr); });
    out.labels.push_back(hit ? SpanKind::kVulnerable : SpanKind::kBenign);
  }
  return out;
}

// Checks segment ordering and coverage. Violations are returned, not thrown.
inline std::vector<std::string> Validate(const TargetCode& target) {
  std::vector<std::string> report;
  auto segs = target.segments;
  std::stable_sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
    return a.range.begin < b.range.begin;
  });
  if (segs != target.segments) report.push_back("segments are not sorted");
  size_t cursor = 0;
  bool any_vulnerable = false;
  for (size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    if (s.range.end <= s.range.begin) {
      report.push_back("empty segment " + RangeString(s.range));
      continue;
    }
    if (s.range.end > target.code.size()) {
      report.push_back("segment " + RangeString(s.range) +
                       " extends past end of code (" +
                       std::to_string(target.code.size()) + ")");
    }
    if (s.range.begin > cursor) {
      report.push_back("gap " + RangeString({cursor, s.range.begin}) +
                       " not covered by any segment");
    } else if (s.range.begin < cursor && i > 0) {
      report.push_back("segments " + RangeString(segs[i - 1].range) + " and " +
                       RangeString(s.range) + " overlap");
    }
    cursor = std::max(cursor, s.range.end);
    any_vulnerable |= s.kind == SpanKind::kVulnerable;
  }
  if (cursor < target.code.size()) {
    report.push_back("gap " + RangeString({cursor, target.code.size()}) +
                     " not covered by any segment");
  }
  if (!any_vulnerable &&
      target.injection_method != InjectionMethod::kDelete) {
    report.push_back("no vulnerable segment");
  }
  return report;
}

}  // namespace deceptforge

#endif  // DECEPTFORGE_TARGET_HPP_
