#pragma once

// Minimal standalone SVG plots of result tables.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fci/errors.hpp"
#include "fci/experiment.hpp"

namespace fci {

enum class PlotKind { Line, PerSite };

struct PlotOptions {
  std::string x;       // column names; empty = pick from the table kind
  std::string y;
  bool log_y = false;
  std::string title;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string default_x(const ResultTable& t) {
  if (t.column("cell") >= 0) return "cell";
  for (const char* c : {"L", "delta", "ell"}) {
    // the scan axis is the column that varies
    const int i = t.column(c);
    if (i < 0) continue;
    for (const auto& r : t.rows) {
      if (r[i] != t.rows.front()[i]) return c;
    }
  }
  return t.column("L") >= 0 ? "L" : t.columns.front();
}

inline std::string default_y(const ResultTable& t) {
  if (t.column("value") >= 0) return "value";
  if (t.column("q_error") >= 0) return "q_error";
  return t.columns.back();
}

}  // namespace detail

/// Renders `table` as an SVG document. Line: polyline with one marker per
/// row. PerSite: one bar per row, grouped by the `kind` column if present.
/// Non-positive values are dropped from log-scale plots.
inline std::string emit_plot(const ResultTable& table, PlotKind kind, PlotOptions opts = {}) {
  if (table.rows.empty()) throw ConfigError("table", "cannot plot an empty table");
  if (opts.x.empty()) opts.x = detail::default_x(table);
  if (opts.y.empty()) opts.y = detail::default_y(table);
  const std::vector<double> xs = table.numeric_column(opts.x);
  const std::vector<double> ys = table.numeric_column(opts.y);
  const int kind_col = table.column("kind");

  struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::string name = kind_col >= 0 ? table.rows[i][kind_col] : opts.y;
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
    if (it == series.end()) {
      series.push_back({name, {}});
      it = series.end() - 1;
    }
    double y = ys[i];
    if (opts.log_y) {
      if (!(y > 0.0)) continue;
      y = std::log10(y);
    }
    if (std::isfinite(xs[i]) && std::isfinite(y)) it->pts.emplace_back(xs[i], y);
  }

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (auto [x, y] : s.pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (kind == PlotKind::PerSite) {
    if (!opts.log_y) {
      y0 = std::min(y0, 0.0);
      y1 = std::max(y1, 0.0);
    }
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (x1 == x0) {
    x0 -= 1;
    x1 += 1;
  }
  if (opts.log_y) {
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
  }
  if (y1 == y0) {
    y0 -= 1;
    y1 += 1;
  }

  constexpr double W = 640, H = 400, ml = 70, mr = 20, mt = 30, mb = 50;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  if (!opts.title.empty()) {
    svg += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + detail::escape_xml(opts.title) +
           "</text>\n";
  }
  // axes
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + detail::fmt(ml) + "\" y1=\"" + detail::fmt(H - mb) + "\" x2=\"" + detail::fmt(W - mr) +
         "\" y2=\"" + detail::fmt(H - mb) + "\"/>\n";
  svg += "<line x1=\"" + detail::fmt(ml) + "\" y1=\"" + detail::fmt(mt) + "\" x2=\"" + detail::fmt(ml) + "\" y2=\"" +
         detail::fmt(H - mb) + "\"/>\n";
  svg += "</g>\n";
  svg += "<g font-size=\"11\" font-family=\"sans-serif\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    svg += "<text x=\"" + detail::fmt(px(xv)) + "\" y=\"" + detail::fmt(H - mb + 16) + "\" text-anchor=\"middle\">" +
           detail::fmt(xv, "%.3g") + "</text>\n";
  }
  // decades on log axes, five even ticks otherwise
  const int decades = static_cast<int>(y1 - y0);
  const int yticks = opts.log_y && decades <= 12 ? decades : 4;
  for (int i = 0; i <= yticks; ++i) {
    const double yv = y0 + (y1 - y0) * i / yticks;
    const std::string ylabel = opts.log_y ? "1e" + detail::fmt(std::round(yv), "%.0f") : detail::fmt(yv, "%.3g");
    svg += "<text x=\"" + detail::fmt(ml - 6) + "\" y=\"" + detail::fmt(py(yv) + 4) + "\" text-anchor=\"end\">" +
           ylabel + "</text>\n";
  }
  svg += "<text x=\"" + detail::fmt((ml + W - mr) / 2) + "\" y=\"" + detail::fmt(H - 12) +
         "\" text-anchor=\"middle\">" + detail::escape_xml(opts.x) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + detail::fmt((mt + H - mb) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         detail::fmt((mt + H - mb) / 2) + ")\">" + detail::escape_xml(opts.log_y ? "log10 " + opts.y : opts.y) +
         "</text>\n";
  svg += "</g>\n";

  const double nseries = static_cast<double>(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 4];
    const auto& pts = series[s].pts;
    svg += "<g class=\"series\" data-name=\"" + detail::escape_xml(series[s].name) + "\">\n";
    if (kind == PlotKind::Line) {
      if (pts.size() > 1) {
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
          svg += (i ? " " : "") + detail::fmt(px(pts[i].first)) + "," + detail::fmt(py(pts[i].second));
        }
        svg += "\"/>\n";
      }
      for (auto [x, y] : pts) {
        svg += "<circle cx=\"" + detail::fmt(px(x)) + "\" cy=\"" + detail::fmt(py(y)) + "\" r=\"3\" fill=\"" +
               color + "\"/>\n";
      }
    } else {
      const double slot = (W - ml - mr) / (x1 - x0);
      const double bw = 0.8 * slot / nseries;
      const double base = py(opts.log_y ? y0 : 0.0);
      for (auto [x, y] : pts) {
        const double left = px(x) - 0.4 * slot + s * bw;
        const double top = std::min(py(y), base);
        svg += "<rect x=\"" + detail::fmt(left) + "\" y=\"" + detail::fmt(top) + "\" width=\"" + detail::fmt(bw) +
               "\" height=\"" + detail::fmt(std::abs(base - py(y))) + "\" fill=\"" + color + "\"/>\n";
      }
    }
    svg += "<text x=\"" + detail::fmt(W - mr - 4) + "\" y=\"" + detail::fmt(mt + 14 * (s + 1)) +
           "\" text-anchor=\"end\" font-size=\"11\" fill=\"" + color + "\">" + detail::escape_xml(series[s].name) +
           "</text>\n";
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace fci
