#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ogrl/error.hpp"
#include "ogrl/experiment.hpp"
#include "ogrl/grid.hpp"
#include "ogrl/shaping.hpp"

namespace ogrl {

inline constexpr double kUniformTolerance = 1e-9;

struct HeatmapCell {
  int row = 0;
  int col = 0;
  std::optional<Action> best_action;  // empty when unexplored
  double probability = 0.0;           // max action probability
  bool explored = false;
};

// A state counts as explored once its row has moved away from uniform.
// Ties go to the earlier action in Left, Down, Right, Up order.
inline std::vector<HeatmapCell> heatmap(const PolicyProb& policy, const GridMap& map) {
  if (!policy.matches(map)) throw OutOfRange("policy does not match the map");
  std::vector<HeatmapCell> cells;
  cells.reserve(policy.states());
  for (std::size_t s = 0; s < policy.states(); ++s) {
    const auto& row = policy.row(s);
    std::size_t best = 0;
    bool uniform = true;
    for (std::size_t i = 0; i < kActionCount; ++i) {
      if (row[i] > row[best]) best = i;
      if (std::abs(row[i] - kActionBaseRate) > kUniformTolerance) uniform = false;
    }
    const Cell c = map.cell_of(s);
    HeatmapCell cell{c.row, c.col, std::nullopt, row[best], !uniform};
    if (cell.explored) cell.best_action = kActions[best];
    cells.push_back(cell);
  }
  return cells;
}

inline std::size_t explored_count(const std::vector<HeatmapCell>& cells) {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.explored; }));
}

inline void write_heatmap_csv(std::ostream& out, const std::vector<HeatmapCell>& cells) {
  out << "row,col,best_action,probability,explored\n";
  char buf[128];
  for (const auto& c : cells) {
    const std::string action = c.best_action ? std::string(action_name(*c.best_action)) : "None";
    std::snprintf(buf, sizeof buf, "%d,%d,%s,%.6f,%d\n", c.row, c.col, action.c_str(),
                  c.probability, c.explored ? 1 : 0);
    out << buf;
  }
}

namespace detail {

inline std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* arrow_glyph(Action a) {
  switch (a) {
    case Action::Left: return "&#8592;";
    case Action::Down: return "&#8595;";
    case Action::Right: return "&#8594;";
    case Action::Up: return "&#8593;";
  }
  return "";
}

}  // namespace detail

// Grid of cells: arrow for the best action and blue shading proportional to
// its probability; unexplored and terminal cells stay blank.
inline std::string heatmap_svg(const std::vector<HeatmapCell>& cells, const GridMap& map) {
  constexpr int kCell = 40;
  constexpr int kPad = 10;
  const int width = map.cols() * kCell + 2 * kPad;
  const int height = map.rows() * kCell + 2 * kPad;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[320];
  for (const auto& c : cells) {
    const int x = kPad + c.col * kCell;
    const int y = kPad + c.row * kCell;
    const Tile tile = map.at({c.row, c.col});
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" "
                  "stroke=\"#999\" stroke-width=\"1\"/>\n",
                  x, y, kCell, kCell);
    svg << buf;
    if (is_terminal(tile)) {
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n"
                    "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"14\" "
                    "text-anchor=\"middle\" fill=\"white\">%c</text>\n",
                    x + 1, y + 1, kCell - 2, kCell - 2,
                    tile == Tile::Hole ? "#333333" : "#2e8b57", x + kCell / 2, y + kCell / 2 + 5,
                    static_cast<char>(tile));
      svg << buf;
      continue;
    }
    if (!c.explored || !c.best_action) continue;
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"#1f4e99\" "
                  "fill-opacity=\"%.4f\"/>\n"
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"22\" "
                  "text-anchor=\"middle\" fill=\"%s\">%s</text>\n",
                  x + 1, y + 1, kCell - 2, kCell - 2, c.probability, x + kCell / 2,
                  y + kCell / 2 + 8, c.probability > 0.5 ? "white" : "black",
                  detail::arrow_glyph(*c.best_action));
    svg << buf;
  }
  svg << "</svg>\n";
  return svg.str();
}

// Mean over runs of the cumulative reward after each episode. Runs of
// different length are averaged over the runs that reached that episode.
inline std::vector<double> mean_cumulative(const std::vector<RunRecord>& records) {
  if (records.empty()) throw EmptyInput("no run records");
  std::size_t longest = 0;
  for (const auto& r : records) longest = std::max(longest, r.cumulative.size());
  std::vector<double> sum(longest, 0.0);
  std::vector<std::size_t> count(longest, 0);
  for (const auto& r : records) {
    for (std::size_t e = 0; e < r.cumulative.size(); ++e) {
      sum[e] += r.cumulative[e];
      ++count[e];
    }
  }
  for (std::size_t e = 0; e < longest; ++e) sum[e] /= static_cast<double>(count[e]);
  return sum;
}

enum class Scale { Linear, Log };

struct CurveSeries {
  std::string label;
  std::vector<RunRecord> records;
};

// Mean cumulative reward against episode, one polyline per series. On the log
// scale values below 1 are drawn at 1.
inline std::string reward_curves_svg(const std::vector<CurveSeries>& series, Scale scale) {
  if (series.empty()) throw EmptyInput("no series to plot");
  std::vector<std::vector<double>> curves;
  std::size_t episodes = 0;
  double top = 0.0;
  for (const auto& s : series) {
    curves.push_back(mean_cumulative(s.records));
    episodes = std::max(episodes, curves.back().size());
    for (double& v : curves.back()) {
      if (scale == Scale::Log) v = std::log10(std::max(v, 1.0));
      top = std::max(top, v);
    }
  }
  if (top <= 0.0) top = 1.0;

  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 170, kTop = 20, kBottom = 50;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;
  const double x_span = episodes > 1 ? static_cast<double>(episodes - 1) : 1.0;
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                kW, kH, kW, kH);
  svg << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<path d=\"M%.1f %.1f V%.1f H%.1f\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                kTop, kTop + plot_h, kLeft + plot_w);
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                "text-anchor=\"middle\">episode (0 .. %zu)</text>\n",
                kLeft + plot_w / 2, kH - 15, episodes ? episodes - 1 : 0);
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"15\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                "transform=\"rotate(-90 15 %.1f)\" text-anchor=\"middle\">%s</text>\n",
                kTop + plot_h / 2, kTop + plot_h / 2,
                scale == Scale::Log ? "log10 cumulative reward" : "cumulative reward");
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                "text-anchor=\"end\">%.6g</text>\n",
                kLeft - 5, kTop + 4, scale == Scale::Log ? std::pow(10.0, top) : top);
  svg << buf;

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& curve = curves[k];
    const char* color = kColors[k % std::size(kColors)];
    const std::size_t stride = std::max<std::size_t>(1, (curve.size() + 999) / 1000);
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t e = 0; e < curve.size(); e += stride) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", e ? " " : "",
                    kLeft + plot_w * static_cast<double>(e) / x_span,
                    kTop + plot_h * (1.0 - curve[e] / top));
      svg << buf;
    }
    if ((curve.size() - 1) % stride != 0) {
      const std::size_t e = curve.size() - 1;
      std::snprintf(buf, sizeof buf, " %.2f,%.2f", kLeft + plot_w * static_cast<double>(e) / x_span,
                    kTop + plot_h * (1.0 - curve[e] / top));
      svg << buf;
    }
    svg << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                  "fill=\"%s\">",
                  kLeft + plot_w + 10, kTop + 15.0 + 18.0 * static_cast<double>(k), color);
    svg << buf << detail::xml_escape(series[k].label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ogrl
