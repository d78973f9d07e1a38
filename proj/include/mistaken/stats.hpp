#pragma once

// Dataset-level bias summaries over (character, frame) cells: mistake rate
// by character id, by expression, by frame index, and the spatial scatter of
// mistaken vs clear characters. Emitted as one long-format CSV plus one SVG
// chart per panel.

#include <algorithm>
#include <string>
#include <vector>

#include "mistaken/generator.hpp"
#include "mistaken/json_codec.hpp"
#include "mistaken/svg.hpp"

namespace mistaken {

struct StatsReport {
  std::array<double, kCharacterCount> p_by_character{};
  std::array<long long, kCharacterCount> cells_by_character{};
  std::array<double, kExpressionCount> p_by_expression{};
  std::array<long long, kExpressionCount> cells_by_expression{};
  std::array<double, kFrameCount> p_by_frame{};
  std::array<long long, kFrameCount> cells_by_frame{};
  struct Point {
    double x = 0.0;
    double y = 0.0;
    bool mistaken = false;
  };
  std::vector<Point> points;
  long long present_cells = 0;
  long long mistaken_cells = 0;
};

inline StatsReport dataset_stats(const Dataset& dataset) {
  if (dataset.scenes.empty())
    throw ValidationError("dataset_stats: dataset is empty");
  StatsReport r;
  std::array<long long, kCharacterCount> hit_c{};
  std::array<long long, kExpressionCount> hit_e{};
  std::array<long long, kFrameCount> hit_t{};
  for (const Scene& s : dataset.scenes) {
    for (int t = 0; t < kFrameCount; ++t) {
      for (int c = 0; c < kCharacterCount; ++c) {
        const CharacterInstance& ch = s.frames[t].characters[c];
        if (!ch.present) continue;
        const bool m = s.labels.matrix[c][t];
        r.cells_by_character[c]++;
        r.cells_by_expression[static_cast<int>(ch.expression)]++;
        r.cells_by_frame[t]++;
        hit_c[c] += m;
        hit_e[static_cast<int>(ch.expression)] += m;
        hit_t[t] += m;
        r.present_cells++;
        r.mistaken_cells += m;
        r.points.push_back({ch.head.x, ch.head.y, m});
      }
    }
  }
  auto rate = [](long long hits, long long cells) {
    return cells > 0 ? static_cast<double>(hits) / static_cast<double>(cells) : 0.0;
  };
  for (int c = 0; c < kCharacterCount; ++c)
    r.p_by_character[c] = rate(hit_c[c], r.cells_by_character[c]);
  for (int e = 0; e < kExpressionCount; ++e)
    r.p_by_expression[e] = rate(hit_e[e], r.cells_by_expression[e]);
  for (int t = 0; t < kFrameCount; ++t)
    r.p_by_frame[t] = rate(hit_t[t], r.cells_by_frame[t]);
  return r;
}

inline std::string stats_csv(const StatsReport& r) {
  std::string out = "panel,key,value\n";
  for (int c = 0; c < kCharacterCount; ++c)
    out += "a," + std::to_string(c) + "," + fmt6(r.p_by_character[c]) + "\n";
  for (int e = 0; e < kExpressionCount; ++e)
    out += "b," + std::string(expression_name(static_cast<Expression>(e))) + "," +
           fmt6(r.p_by_expression[e]) + "\n";
  for (int t = 0; t < kFrameCount; ++t)
    out += "c," + std::to_string(t) + "," + fmt6(r.p_by_frame[t]) + "\n";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    const std::string cls = p.mistaken ? "mistaken" : "clear";
    out += "d," + cls + "." + std::to_string(i) + ".x," + fmt6(p.x) + "\n";
    out += "d," + cls + "." + std::to_string(i) + ".y," + fmt6(p.y) + "\n";
  }
  return out;
}

namespace detail {

inline std::string bar_chart_svg(const std::string& title,
                                 const std::vector<std::string>& labels,
                                 const std::vector<double>& values) {
  const double w = 640, h = 360, left = 50, bottom = 310, top = 48;
  SvgBuilder svg(w, h);
  svg.rect(0, 0, w, h, "#ffffff");
  svg.text(left, 24, title, 14, "#222222");
  double vmax = 1e-9;
  for (double v : values) vmax = std::max(vmax, v);
  const double n = static_cast<double>(values.size());
  const double band = (w - left - 20) / n;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double bh = (bottom - top) * (values[i] / vmax);
    const double x = left + band * static_cast<double>(i);
    svg.rect(x + band * 0.15, bottom - bh, band * 0.7, bh, "#4c72b0");
    svg.text(x + band * 0.2, bottom + 16, labels[i], 9, "#444444");
    svg.text(x + band * 0.12, bottom - bh - 4, fmt2(values[i] * 100), 8, "#666666");
  }
  svg.line(left, bottom, w - 20, bottom, "#333333", 1.0);
  svg.line(left, top, left, bottom, "#333333", 1.0);
  svg.text(8, top - 10, "% of cells", 9, "#666666");
  return svg.str();
}

inline std::string scatter_svg(const StatsReport& r) {
  const double w = 640, h = 400, left = 40, top = 40;
  const double sx = (w - left - 20) / kCanvasW;
  const double sy = (h - top - 30) / kCanvasH;
  SvgBuilder svg(w, h);
  svg.rect(0, 0, w, h, "#ffffff");
  svg.text(left, 24, "character positions, mistaken vs clear", 14, "#222222");
  svg.rect(left, top, kCanvasW * sx, kCanvasH * sy, "#f7f7f7", "stroke=\"#bbbbbb\"");
  std::size_t n_mistaken = 0, n_clear = 0;
  for (const auto& p : r.points) (p.mistaken ? n_mistaken : n_clear)++;
  const std::size_t cap = 1500;
  const std::size_t step_m = std::max<std::size_t>(1, n_mistaken / cap + 1);
  const std::size_t step_c = std::max<std::size_t>(1, n_clear / cap + 1);
  std::size_t im = 0, ic = 0;
  for (const auto& p : r.points) {
    const bool keep = p.mistaken ? (im++ % step_m == 0) : (ic++ % step_c == 0);
    if (!keep) continue;
    svg.circle(left + p.x * sx, top + p.y * sy, 2.2,
               p.mistaken ? "#d62728" : "#9dc0de");
  }
  svg.circle(left + 10, h - 14, 3, "#d62728");
  svg.text(left + 18, h - 10, "mistaken", 10, "#444444");
  svg.circle(left + 92, h - 14, 3, "#9dc0de");
  svg.text(left + 100, h - 10, "clear", 10, "#444444");
  return svg.str();
}

}  // namespace detail

// Writes stats.csv and stats-{a,b,c,d}.svg into dir (which must exist).
inline void write_stats(const StatsReport& r, const std::string& dir) {
  write_text_file(dir + "/stats.csv", stats_csv(r));
  std::vector<std::string> char_labels, expr_labels, frame_labels;
  for (int c = 0; c < kCharacterCount; ++c) char_labels.push_back(std::to_string(c));
  for (int e = 0; e < kExpressionCount; ++e)
    expr_labels.push_back(expression_name(static_cast<Expression>(e)));
  for (int t = 0; t < kFrameCount; ++t) frame_labels.push_back(std::to_string(t));
  write_text_file(
      dir + "/stats-a.svg",
      detail::bar_chart_svg("mistake rate by character id", char_labels,
                            {r.p_by_character.begin(), r.p_by_character.end()}));
  write_text_file(
      dir + "/stats-b.svg",
      detail::bar_chart_svg("mistake rate by expression", expr_labels,
                            {r.p_by_expression.begin(), r.p_by_expression.end()}));
  write_text_file(
      dir + "/stats-c.svg",
      detail::bar_chart_svg("mistake rate by frame index", frame_labels,
                            {r.p_by_frame.begin(), r.p_by_frame.end()}));
  write_text_file(dir + "/stats-d.svg", detail::scatter_svg(r));
}

}  // namespace mistaken
