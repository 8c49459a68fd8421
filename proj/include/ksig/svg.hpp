#pragma once

// Minimal deterministic SVG line charts.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace ksig {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  bool log_y = false;
  int width = 640;
  int height = 400;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
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

}  // namespace detail

/// Polyline chart with axes, five ticks per axis and a legend. Points that
/// are non-finite, or non-positive on a log axis, break the line.
[[nodiscard]] inline std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& opt) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  const double left = 78, right = 160, top = 36, bottom = 48;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;

  auto ty = [&](double y) { return opt.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) { return std::isfinite(x) && std::isfinite(y) && (!opt.log_y || y > 0.0); };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 - x0 <= 0.0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 <= 0.0) {
    const double pad = std::max(1.0, std::abs(y0)) * 0.5;
    y0 -= pad;
    y1 += pad;
  }
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  using detail::fmt;
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
       std::to_string(opt.height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::escape_xml(opt.title) + "</text>\n";
  o += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double X = px(fx);
    o += "<line x1=\"" + fmt(X) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(X) + "\" y2=\"" + fmt(top + ph + 5) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt(X) + "\" y=\"" + fmt(top + ph + 18) + "\" text-anchor=\"middle\">" + fmt(fx) + "</text>\n";
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double Y = top + ph - (fy - y0) / (y1 - y0) * ph;
    o += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(Y) + "\" x2=\"" + fmt(left) + "\" y2=\"" + fmt(Y) +
         "\" stroke=\"black\"/>\n";
    const std::string label = opt.log_y ? "1e" + fmt(fy, "%.3g") : fmt(fy);
    o += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(Y + 4) + "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  o += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(opt.height - 10.0) + "\" text-anchor=\"middle\">" +
       detail::escape_xml(opt.x_label) + "</text>\n";
  o += "<text x=\"16\" y=\"" + fmt(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt(top + ph / 2) + ")\">" + detail::escape_xml(opt.y_label) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % (sizeof palette / sizeof *palette)];
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
             "\"/>\n";
      }
      pts.clear();
    };
    const auto& sr = series[s];
    for (std::size_t i = 0; i < std::min(sr.x.size(), sr.y.size()); ++i) {
      if (!usable(sr.x[i], sr.y[i])) {
        flush();
        continue;
      }
      pts += (pts.empty() ? "" : " ") + fmt(px(sr.x[i]), "%.2f") + "," + fmt(py(sr.y[i]), "%.2f");
    }
    flush();
    const double ly = top + 12 + 18.0 * static_cast<double>(s);
    o += "<line x1=\"" + fmt(left + pw + 12) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(left + pw + 32) + "\" y2=\"" +
         fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fmt(left + pw + 38) + "\" y=\"" + fmt(ly + 4) + "\">" + detail::escape_xml(sr.label) +
         "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace ksig
