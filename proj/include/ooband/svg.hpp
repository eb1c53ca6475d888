#pragma once
// Minimal static SVG line charts: one x/y series per algorithm with an
// optional shaded band between a lower and upper quantile curve. Kept
// deliberately small — axes, ticks, legend, nothing interactive.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ooband {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;      // central curve (mean)
  std::vector<double> y_lo;   // band bottom; empty = no band
  std::vector<double> y_hi;   // band top
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

// A short palette; series cycle through it.
inline const char* plot_color(size_t i) {
  static const char* colors[] = {"#1b6ca8", "#c23b22", "#2e8b57",
                                 "#8a2be2", "#d2691e", "#555555"};
  return colors[i % 6];
}

}  // namespace detail

// Render the chart as an SVG document string.
inline std::string render_line_chart(const std::vector<PlotSeries>& series,
                                     const std::string& title,
                                     const std::string& x_label,
                                     const std::string& y_label) {
  if (series.empty()) {
    throw std::invalid_argument("ooband::render_line_chart: no series");
  }
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      throw std::invalid_argument(
          "ooband::render_line_chart: series length mismatch");
    }
    if (!s.y_lo.empty() &&
        (s.y_lo.size() != s.x.size() || s.y_hi.size() != s.x.size())) {
      throw std::invalid_argument(
          "ooband::render_line_chart: band length mismatch");
    }
    for (size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
      if (!s.y_lo.empty()) {
        y_min = std::min(y_min, s.y_lo[i]);
        y_max = std::max(y_max, s.y_hi[i]);
      }
    }
  }
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double width = 760, height = 480;
  const double ml = 80, mr = 180, mt = 50, mb = 60;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;
  const auto sx = [&](double x) {
    return ml + (x - x_min) / (x_max - x_min) * pw;
  };
  const auto sy = [&](double y) {
    return mt + ph - (y - y_min) / (y_max - y_min) * ph;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title
      << "</text>\n";

  // Axes with 5 ticks each.
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    svg << "<line x1=\"" << detail::fmt(sx(fx)) << "\" y1=\"" << mt + ph
        << "\" x2=\"" << detail::fmt(sx(fx)) << "\" y2=\"" << mt + ph + 5
        << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << detail::fmt(sx(fx)) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << detail::fmt(fx) << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << detail::fmt(sy(fy))
        << "\" x2=\"" << ml << "\" y2=\"" << detail::fmt(sy(fy))
        << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << detail::fmt(sy(fy) + 4)
        << "\" text-anchor=\"end\">" << detail::fmt(fy) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\""
      << ml + pw << "\" y2=\"" << mt + ph << "\" stroke=\"#333\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + ph << "\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">" << x_label << "</text>\n";
  svg << "<text x=\"20\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 20 " << mt + ph / 2
      << ")\">" << y_label << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = detail::plot_color(si);
    if (!s.y_lo.empty()) {
      svg << "<polygon class=\"band\" fill=\"" << color
          << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i) {
        svg << detail::fmt(sx(s.x[i])) << "," << detail::fmt(sy(s.y_hi[i]))
            << " ";
      }
      for (size_t i = s.x.size(); i-- > 0;) {
        svg << detail::fmt(sx(s.x[i])) << "," << detail::fmt(sy(s.y_lo[i]))
            << " ";
      }
      svg << "\"/>\n";
    }
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      svg << detail::fmt(sx(s.x[i])) << "," << detail::fmt(sy(s.y[i]))
          << " ";
    }
    svg << "\"/>\n";
    for (size_t i = 0; i < s.x.size(); ++i) {
      svg << "<circle cx=\"" << detail::fmt(sx(s.x[i])) << "\" cy=\""
          << detail::fmt(sy(s.y[i])) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    // Legend entry.
    const double ly = mt + 16 + 22 * static_cast<double>(si);
    svg << "<line x1=\"" << ml + pw + 14 << "\" y1=\"" << ly << "\" x2=\""
        << ml + pw + 40 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << ml + pw + 46 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ooband
