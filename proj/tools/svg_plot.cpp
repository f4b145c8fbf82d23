#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace shadowbench {

namespace {

constexpr double kLeft = 90.0;
constexpr double kRight = 190.0;  // legend column
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
};

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

void header(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotWidth << "\" height=\"" << kPlotHeight
      << "\" viewBox=\"0 0 " << kPlotWidth << ' ' << kPlotHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kPlotWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"18\">" << escape(title) << "</text>\n";
}

}  // namespace

void write_line_plot(std::ostream& out, const PlotSpec& spec, const std::vector<Series>& series) {
  const double x0 = kLeft, x1 = kPlotWidth - kRight;
  const double y0 = kTop, y1 = kPlotHeight - kBottom;

  auto keep = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0.0);
  };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };

  Range xr, yr;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!keep(s.x[i], s.y[i])) continue;
      xr.add(s.x[i]);
      yr.add(ty(s.y[i]));
    }
  }
  if (xr.empty()) {
    xr = {0.0, 1.0};
    yr = {0.0, 1.0};
  }
  if (spec.log_y) {
    yr.lo = std::floor(yr.lo);
    yr.hi = std::ceil(yr.hi);
  }
  if (xr.hi - xr.lo <= 0.0) xr.hi = xr.lo + 1.0;
  if (yr.hi - yr.lo <= 0.0) yr.hi = yr.lo + 1.0;

  auto px = [&](double x) { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
  auto py = [&](double t) { return y1 - (t - yr.lo) / (yr.hi - yr.lo) * (y1 - y0); };

  header(out, spec.title);
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
      << num(y1 - y0) << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = nice_step(xr.hi - xr.lo, 8);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(px(t)) << "\" y2=\""
        << num(y1 + 5) << "\" stroke=\"black\"/>";
    out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y1 + 20) << "\" text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
  }
  if (spec.log_y) {
    const double span = yr.hi - yr.lo;
    const int every = span > 12 ? static_cast<int>(std::ceil(span / 12)) : 1;
    for (int e = static_cast<int>(yr.lo); e <= static_cast<int>(yr.hi); e += every) {
      out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(py(e)) << "\" x2=\"" << num(x1) << "\" y2=\""
          << num(py(e)) << "\" stroke=\"#dddddd\"/>";
      out << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py(e) + 4) << "\" text-anchor=\"end\">1e" << e
          << "</text>\n";
    }
  } else {
    const double ys = nice_step(yr.hi - yr.lo, 6);
    for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
      out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(x1) << "\" y2=\""
          << num(py(t)) << "\" stroke=\"#dddddd\"/>";
      out << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t) << "</text>\n";
    }
  }
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << kPlotHeight - 20
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.x_label) << "</text>\n";
  out << "<text transform=\"translate(22," << num((y0 + y1) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!keep(s.x[i], s.y[i])) continue;
      if (!first) out << ' ';
      out << num(px(s.x[i])) << ',' << num(py(ty(s.y[i])));
      first = false;
    }
    out << "\"/>\n";
    const double ly = y0 + 10 + 20.0 * static_cast<double>(k);
    out << "<line x1=\"" << num(x1 + 15) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(x1 + 40) << "\" y2=\""
        << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    out << "<text x=\"" << num(x1 + 46) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
  }
  out << "</g>\n</svg>\n";
}

void write_curve_plot(std::ostream& out, const std::string& title, const std::vector<Point2>& outline,
                      const std::vector<Point2>& curve) {
  Range xr, yr;
  for (const auto* pts : {&outline, &curve}) {
    for (const Point2& p : *pts) {
      xr.add(p[0]);
      yr.add(p[1]);
    }
  }
  if (xr.empty()) xr = yr = {0.0, 1.0};
  // Equal scales on both axes, with a margin.
  const double span = std::max({xr.hi - xr.lo, yr.hi - yr.lo, 1e-12}) * 1.1;
  const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
  const double side = std::min(kPlotWidth - 2 * kLeft, kPlotHeight - kTop - kBottom);
  const double ox = kPlotWidth / 2.0, oy = kTop + side / 2.0;
  auto px = [&](double x) { return ox + (x - cx) / span * side; };
  auto py = [&](double y) { return oy - (y - cy) / span * side; };

  header(out, title);
  out << "<polygon fill=\"#e8eef7\" stroke=\"black\" points=\"";
  for (std::size_t i = 0; i < outline.size(); ++i) {
    out << (i ? " " : "") << num(px(outline[i][0])) << ',' << num(py(outline[i][1]));
  }
  out << "\"/>\n<polyline fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"2.5\" points=\"";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (i ? " " : "") << num(px(curve[i][0])) << ',' << num(py(curve[i][1]));
  }
  out << "\"/>\n";
  for (const Point2& p : curve) {
    out << "<circle cx=\"" << num(px(p[0])) << "\" cy=\"" << num(py(p[1])) << "\" r=\"4\" fill=\"#d62728\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace shadowbench
