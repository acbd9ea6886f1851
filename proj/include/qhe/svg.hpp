#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace qhe {

// Minimal self-contained SVG line charts: one polyline per series, labeled
// axes, fixed palette. Points with NaN in either coordinate are skipped.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

}  // namespace svg_detail

inline std::string line_chart_svg(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<Series>& series) {
  const double width = 640, height = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  const bool empty = !(x_min <= x_max);
  if (empty) {
    x_min = 0; x_max = 1; y_min = 0; y_max = 1;
  }
  if (x_max == x_min) { x_min -= 0.5; x_max += 0.5; }
  if (y_max == y_min) { y_min -= 0.5; y_max += 0.5; }

  const auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  const auto py = [&](double y) { return mt + ph - (y - y_min) / (y_max - y_min) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  out += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";

  // axes
  out += "<line x1=\"" + svg_detail::num(ml) + "\" y1=\"" + svg_detail::num(mt + ph) +
         "\" x2=\"" + svg_detail::num(ml + pw) + "\" y2=\"" + svg_detail::num(mt + ph) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + svg_detail::num(ml) + "\" y1=\"" + svg_detail::num(mt) + "\" x2=\"" +
         svg_detail::num(ml) + "\" y2=\"" + svg_detail::num(mt + ph) + "\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double fx = x_min + (x_max - x_min) * t / 4.0;
    const double fy = y_min + (y_max - y_min) * t / 4.0;
    out += "<line x1=\"" + svg_detail::num(px(fx)) + "\" y1=\"" + svg_detail::num(mt + ph) +
           "\" x2=\"" + svg_detail::num(px(fx)) + "\" y2=\"" + svg_detail::num(mt + ph + 5) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + svg_detail::num(px(fx)) + "\" y=\"" + svg_detail::num(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           svg_detail::num(fx) + "</text>\n";
    out += "<line x1=\"" + svg_detail::num(ml - 5) + "\" y1=\"" + svg_detail::num(py(fy)) +
           "\" x2=\"" + svg_detail::num(ml) + "\" y2=\"" + svg_detail::num(py(fy)) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + svg_detail::num(ml - 8) + "\" y=\"" + svg_detail::num(py(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           svg_detail::num(fy) + "</text>\n";
  }

  out += "<text x=\"" + svg_detail::num(ml + pw / 2) + "\" y=\"" + svg_detail::num(height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + x_label +
         "</text>\n";
  out += "<text x=\"16\" y=\"" + svg_detail::num(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 16 " + svg_detail::num(mt + ph / 2) + ")\">" + y_label +
         "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
      points += svg_detail::num(px(s.x[i])) + "," + svg_detail::num(py(s.y[i])) + " ";
    }
    if (!points.empty())
      out += "<polyline fill=\"none\" stroke=\"" + std::string(svg_detail::palette(si)) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = mt + 16.0 * static_cast<double>(si);
    out += "<rect x=\"" + svg_detail::num(ml + pw - 130) + "\" y=\"" + svg_detail::num(ly) +
           "\" width=\"10\" height=\"10\" fill=\"" + svg_detail::palette(si) + "\"/>\n";
    out += "<text x=\"" + svg_detail::num(ml + pw - 115) + "\" y=\"" + svg_detail::num(ly + 9) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name + "</text>\n";
  }

  out += "</svg>\n";
  return out;
}

}  // namespace qhe
