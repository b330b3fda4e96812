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

#ifndef DECEPTFORGE_CASE_SPEC_HPP_
#define DECEPTFORGE_CASE_SPEC_HPP_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/genome.hpp"
#include "deceptforge/target.hpp"
#include "json.hpp"

namespace deceptforge {

// One attack case as stored on disk. See docs/case_format.md for the schema.
struct CaseSpec {
  std::string id;
  std::string cwe;
  Language language = Language::kC;
  std::string task;
  std::string seed_template_file;  // relative to the case file's directory
  Attachment attachment = Attachment::kPrefix;
  std::string solution_code;
  std::vector<EditOp> edits;
  std::string detector_id;
  std::string notes;

  // Directory the case was loaded from; not serialized.
  std::filesystem::path base_dir;

  static CaseSpec FromJson(const nlohmann::json& j) {
    CaseSpec c;
    try {
      c.id = j.at("id").get<std::string>();
      c.cwe = j.at("cwe").get<std::string>();
      c.language = ParseLanguage(j.at("language").get<std::string>());
      c.task = j.at("task").get<std::string>();
      c.seed_template_file = j.at("seed_template_file").get<std::string>();
      c.attachment = ParseAttachment(j.at("attachment").get<std::string>());
      c.solution_code = j.at("solution_code").get<std::string>();
      for (const auto& e : j.at("edits")) {
        EditOp op;
        op.op = ParseEditKind(e.at("op").get<std::string>());
        op.start = e.at("start").get<size_t>();
        op.end = e.at("end").get<size_t>();
        op.text = e.at("text").get<std::string>();
        op.kind = ParseSpanKind(e.at("kind").get<std::string>());
        if (e.contains("anchor_range") && !e["anchor_range"].is_null()) {
          const auto& r = e["anchor_range"];
          if (!r.is_array() || r.size() != 2) {
            throw ConfigError("anchor_range must be [start, end]");
          }
          op.anchor_range = Range{r[0].get<size_t>(), r[1].get<size_t>()};
        }
        c.edits.push_back(std::move(op));
      }
      c.detector_id = j.at("detector_id").get<std::string>();
      c.notes = j.value("notes", "");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad case spec: ") + e.what());
    }
    return c;
  }

  nlohmann::json ToJson() const {
    nlohmann::json edits_json = nlohmann::json::array();
    for (const auto& e : edits) {
      nlohmann::json ej = {{"op", EditKindName(e.op)},
                           {"start", e.start},
                           {"end", e.end},
                           {"text", e.text},
                           {"kind", SpanKindName(e.kind)}};
      if (e.anchor_range) {
        ej["anchor_range"] = {e.anchor_range->begin, e.anchor_range->end};
      }
      edits_json.push_back(std::move(ej));
    }
    return {{"id", id},
            {"cwe", cwe},
            {"language", LanguageName(language)},
            {"task", task},
            {"seed_template_file", seed_template_file},
            {"attachment", AttachmentName(attachment)},
            {"solution_code", solution_code},
            {"edits", std::move(edits_json)},
            {"detector_id", detector_id},
            {"notes", notes}};
  }

  static CaseSpec Load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open case " + path.string());
    CaseSpec c;
    try {
      c = FromJson(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("case " + path.string() + ": " + e.what());
    }
    c.base_dir = path.parent_path();
    return c;
  }

  TargetCode BuildTarget() const {
    TargetCode t = ApplyEdits(solution_code, edits);
    t.language = language;
    t.cwe_id = cwe;
    return t;
  }

  std::string SeedTemplateText() const {
    const auto path = base_dir / seed_template_file;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open seed template " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  PromptGenome SeedGenome() const {
    return PromptGenome::FromText(SeedTemplateText(), attachment, "seed");
  }

  // Problems that make the case unusable; empty when valid.
  std::vector<std::string> Problems() const {
    std::vector<std::string> out;
    if (id.empty()) out.push_back("missing id");
    if (text::Trim(task).empty()) out.push_back("empty task");
    if (detector_id.empty()) out.push_back("missing detector_id");
    if (edits.empty()) out.push_back("no edits");
    try {
      for (auto& v : Validate(BuildTarget())) out.push_back("target: " + v);
    } catch (const Error& e) {
      out.push_back(std::string("edits: ") + e.what());
    }
    return out;
  }
};

}  // namespace deceptforge

#endif  // DECEPTFORGE_CASE_SPEC_HPP_
