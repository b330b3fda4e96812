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

#ifndef DECEPTFORGE_DETECT_HPP_
#define DECEPTFORGE_DETECT_HPP_

#include <fstream>
#include <map>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "deceptforge/case_spec.hpp"
#include "deceptforge/errors.hpp"
#include "json.hpp"

namespace deceptforge {

// A regex rule for one CWE. Code is vulnerable when every `must_match`
// expression hits and no `must_not_match` expression does; the exclusions
// encode "the secure form is absent".
struct VulnPattern {
  std::string detector_id;
  std::string cwe_id;
  std::string language = "any";  // c, python or any
  std::vector<std::string> must_match;
  std::vector<std::string> must_not_match;
  bool needs_review = false;
  std::string description;
};

struct PatternHit {
  std::string pattern;
  size_t begin = 0;
  size_t end = 0;
};

struct DetectionVerdict {
  bool vulnerable = false;
  std::vector<PatternHit> matched;
  bool needs_review = false;
};

// VulnPattern with its expressions compiled. Construction is the only place
// a PatternError can come from.
class CompiledPattern {
 public:
  explicit CompiledPattern(VulnPattern p) : pattern_(std::move(p)) {
    if (pattern_.detector_id.empty()) throw PatternError("pattern without detector_id");
    if (pattern_.must_match.empty() && pattern_.must_not_match.empty()) {
      throw PatternError("pattern " + pattern_.detector_id + " has no expressions");
    }
    if (pattern_.language != "c" && pattern_.language != "python" &&
        pattern_.language != "any") {
      throw PatternError("pattern " + pattern_.detector_id +
                         " has unknown language " + pattern_.language);
    }
    auto compile = [&](const std::vector<std::string>& src) {
      std::vector<std::regex> out;
      for (const auto& s : src) {
        try {
          out.emplace_back(s, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
          throw PatternError("pattern " + pattern_.detector_id + ": bad regex '" +
                             s + "': " + e.what());
        }
      }
      return out;
    };
    must_ = compile(pattern_.must_match);
    must_not_ = compile(pattern_.must_not_match);
  }

  const VulnPattern& pattern() const { return pattern_; }

  DetectionVerdict Scan(std::string_view code) const {
    DetectionVerdict v;
    v.needs_review = pattern_.needs_review;
    bool all_required = true;
    bool any_excluded = false;
    const std::string s(code);
    auto collect = [&](const std::regex& re, const std::string& src) {
      bool hit = false;
      for (auto it = std::sregex_iterator(s.begin(), s.end(), re);
           it != std::sregex_iterator(); ++it) {
        const auto pos = static_cast<size_t>(it->position());
        v.matched.push_back({src, pos, pos + static_cast<size_t>(it->length())});
        hit = true;
        if (it->length() == 0) break;
      }
      return hit;
    };
    for (size_t i = 0; i < must_.size(); ++i) {
      all_required &= collect(must_[i], pattern_.must_match[i]);
    }
    for (size_t i = 0; i < must_not_.size(); ++i) {
      any_excluded |= collect(must_not_[i], pattern_.must_not_match[i]);
    }
    v.vulnerable = all_required && !any_excluded;
    return v;
  }

 private:
  VulnPattern pattern_;
  std::vector<std::regex> must_;
  std::vector<std::regex> must_not_;
};

inline VulnPattern VulnPatternFromJson(const nlohmann::json& j) {
  VulnPattern p;
  try {
    p.detector_id = j.at("detector_id").get<std::string>();
    p.cwe_id = j.at("cwe_id").get<std::string>();
    p.language = j.value("language", "any");
    p.must_match = j.value("must_match", std::vector<std::string>{});
    p.must_not_match = j.value("must_not_match", std::vector<std::string>{});
    p.needs_review = j.value("needs_review", false);
    p.description = j.value("description", "");
  } catch (const nlohmann::json::exception& e) {
    throw PatternError(std::string("bad pattern record: ") + e.what());
  }
  return p;
}

inline DetectionVerdict Scan(std::string_view code, const VulnPattern& pattern) {
  return CompiledPattern(pattern).Scan(code);
}

class PatternLibrary {
 public:
  PatternLibrary() = default;

  void Add(VulnPattern p) {
    CompiledPattern compiled(std::move(p));
    const auto id = compiled.pattern().detector_id;
    if (!patterns_.emplace(id, std::move(compiled)).second) {
      throw PatternError("duplicate detector_id " + id);
    }
  }

  static PatternLibrary FromJson(const nlohmann::json& j) {
    if (!j.is_array()) throw PatternError("pattern library must be a JSON list");
    PatternLibrary lib;
    for (const auto& rec : j) lib.Add(VulnPatternFromJson(rec));
    return lib;
  }

  static PatternLibrary Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pattern library " + path);
    try {
      return FromJson(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw PatternError("pattern library " + path + ": " + e.what());
    }
  }

  const CompiledPattern& Get(const std::string& detector_id) const {
    auto it = patterns_.find(detector_id);
    if (it == patterns_.end()) {
      throw ConfigError("unknown detector_id '" + detector_id + "'");
    }
    return it->second;
  }

  bool Has(const std::string& detector_id) const {
    return patterns_.count(detector_id) != 0;
  }
  size_t size() const { return patterns_.size(); }

 private:
  std::map<std::string, CompiledPattern> patterns_;
};

// Regex verdict for a generated sample under the case's detector. Patterns
// flagged needs_review leave the final call to a human via the annotations
// sidecar.
inline DetectionVerdict JudgeOutput(std::string_view generated_code,
                                    const CaseSpec& c, const PatternLibrary& lib) {
  return lib.Get(c.detector_id).Scan(generated_code);
}

}  // namespace deceptforge

#endif  // DECEPTFORGE_DETECT_HPP_
