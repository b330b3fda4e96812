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

#ifndef DECEPTFORGE_REPORT_HPP_
#define DECEPTFORGE_REPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/evolve.hpp"
#include "deceptforge/fitness.hpp"
#include "json.hpp"

namespace deceptforge::report {

inline void WriteFile(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << body;
}

inline std::string FormatDouble(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string TraceJsonl(const AttackResult& r) {
  std::string out;
  for (const auto& g : r.genome_losses) {
    out += LossTraceLine(g.iteration, g.genome_id, g.loss).dump();
    out += '\n';
  }
  return out;
}

inline std::string ProgressCsv(const AttackResult& r) {
  std::string out = "iteration,best_total,mean_total,best_genome_id,greedy_hit\n";
  for (const auto& t : r.trace) {
    out += std::to_string(t.iteration) + "," + FormatDouble(t.best_total) + "," +
           FormatDouble(t.mean_total) + "," + t.best_genome_id + "," +
           (t.greedy_hit ? "1" : "0") + "\n";
  }
  return out;
}

// Static line chart of best and mean loss per iteration.
inline std::string LossSvg(const AttackResult& r, int width = 640, int height = 360) {
  const double left = 60, right = 20, top = 20, bottom = 40;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  double lo = 0.0, hi = 1.0;
  if (!r.trace.empty()) {
    lo = hi = r.trace.front().best_total;
    for (const auto& t : r.trace) {
      lo = std::min({lo, t.best_total, t.mean_total});
      hi = std::max({hi, t.best_total, t.mean_total});
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double n = std::max<double>(1.0, static_cast<double>(r.trace.size()) - 1.0);
  auto x = [&](size_t i) { return left + pw * static_cast<double>(i) / n; };
  auto y = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };
  auto poly = [&](bool best) {
    std::string pts;
    for (size_t i = 0; i < r.trace.size(); ++i) {
      const double v = best ? r.trace[i].best_total : r.trace[i].mean_total;
      pts += FormatDouble(x(i), 2) + "," + FormatDouble(y(v), 2) + " ";
    }
    return pts;
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
    << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
    << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << left - 5 << "\" y=\"" << top + 4
    << "\" text-anchor=\"end\">" << FormatDouble(hi, 2) << "</text>\n"
    << "<text x=\"" << left - 5 << "\" y=\"" << top + ph
    << "\" text-anchor=\"end\">" << FormatDouble(lo, 2) << "</text>\n"
    << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 8
    << "\" text-anchor=\"middle\">iteration</text>\n"
    << "<polyline fill=\"none\" stroke=\"#999999\" points=\"" << poly(false)
    << "\"/>\n"
    << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\""
    << poly(true) << "\"/>\n"
    << "<text x=\"" << left + pw - 5 << "\" y=\"" << top + 12
    << "\" text-anchor=\"end\" fill=\"#c0392b\">best</text>\n"
    << "<text x=\"" << left + pw - 5 << "\" y=\"" << top + 26
    << "\" text-anchor=\"end\" fill=\"#999999\">mean</text>\n"
    << "</svg>\n";
  return s.str();
}

// Everything an attack run leaves behind except the config snapshot, which
// callers write before the run starts.
inline void WriteAttackOutputs(const std::filesystem::path& dir,
                               const AttackResult& r) {
  std::filesystem::create_directories(dir);
  WriteFile(dir / "trace.jsonl", TraceJsonl(r));
  WriteFile(dir / "progress.csv", ProgressCsv(r));
  WriteFile(dir / "loss.svg", LossSvg(r));
  WriteFile(dir / "best_genome.txt", r.best_genome.Text() + "\n");
  WriteFile(dir / "report.json", AttackResultJson(r).dump(2) + "\n");
}

}  // namespace deceptforge::report

#endif  // DECEPTFORGE_REPORT_HPP_
