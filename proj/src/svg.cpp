#include "pushstab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "pushstab/csv.hpp"

namespace pushstab {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg(const std::filesystem::path& path, const SvgPlot& plot) {
  const double width = 640.0;
  const double height = plot.equal_aspect ? 640.0 : 480.0;
  const double left = 70.0, right = 20.0, top = 40.0, bottom = 55.0;

  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  const double inf = std::numeric_limits<double>::infinity();
  double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("write_svg: series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a);
      x1 = std::max(x1, a);
      y0 = std::min(y0, b);
      y1 = std::max(y1, b);
    }
  }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0;
  if (!(y0 <= y1)) y0 = 0.0, y1 = 1.0;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  if (plot.equal_aspect) {
    const double span = std::max(x1 - x0, y1 - y0);
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    x0 = cx - 0.5 * span, x1 = cx + 0.5 * span;
    y0 = cy - 0.5 * span, y1 = cy + 0.5 * span;
  }
  const double padx = 0.04 * (x1 - x0), pady = 0.04 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };

  auto os = open_output(path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
     << "</text>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto axis_value = [](double v, bool log) { return log ? std::pow(10.0, v) : v; };
  for (double f : {0.0, 0.5, 1.0}) {
    const double vx = x0 + padx + f * (x1 - x0 - 2 * padx);
    const double vy = y0 + pady + f * (y1 - y0 - 2 * pady);
    const double sx = left + (vx - x0) / (x1 - x0) * pw;
    const double sy = top + (1.0 - (vy - y0) / (y1 - y0)) * ph;
    os << "<text x=\"" << num(sx) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">"
       << tick(axis_value(vx, plot.log_x)) << "</text>\n";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy + 4) << "\" text-anchor=\"end\">"
       << tick(axis_value(vy, plot.log_y)) << "</text>\n";
  }
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12) << "\" text-anchor=\"middle\">"
     << escape(plot.x_label) << (plot.log_x ? " (log)" : "") << "</text>\n";
  os << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(plot.y_label) << (plot.log_y ? " (log)" : "") << "</text>\n";

  double legend_y = top + 14;
  for (const auto& s : plot.series) {
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << num(px(s.x[i])) << "," << num(py(s.y[i]));
      os << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"" << num(s.radius)
           << "\" fill=\"" << s.color << "\"/>\n";
    }
    if (!s.label.empty()) {
      os << "<rect x=\"" << num(left + pw - 150) << "\" y=\"" << num(legend_y - 9) << "\" width=\"10\" height=\"10\" fill=\""
         << s.color << "\"/>\n";
      os << "<text x=\"" << num(left + pw - 135) << "\" y=\"" << num(legend_y) << "\">" << escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  os << "</svg>\n";
}

}  // namespace pushstab
