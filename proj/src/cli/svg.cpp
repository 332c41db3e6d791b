#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace aeg::cli {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::fabs(lo) * 0.05, 0.5);
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

std::string render_line_plot(const PlotSpec& spec) {
  const double left = 70, right = 170, top = 40, bottom = 55;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;

  Range rx, ry;
  for (const auto& s : spec.series) {
    for (std::size_t k = 0; k < s.xs.size() && k < s.ys.size(); ++k) {
      if (std::isfinite(s.ys[k])) {
        rx.add(s.xs[k]);
        ry.add(s.ys[k]);
      }
    }
  }
  rx.settle();
  ry.settle();
  auto px = [&](double x) { return left + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double y) { return top + (ry.hi - y) / (ry.hi - ry.lo) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    o << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(spec.title) << "</text>\n";
  }
  o << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 5; ++k) {
    const double y = ry.lo + (ry.hi - ry.lo) * k / 5.0;
    o << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << fmt(left) << "\" y2=\""
      << fmt(py(y)) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(y) + 4) << "\" text-anchor=\"end\">" << fmt(y, "%.4g")
      << "</text>\n";
  }
  if (!spec.x_tick_names.empty()) {
    for (std::size_t k = 0; k < spec.x_tick_names.size(); ++k) {
      const double x = px(static_cast<double>(k));
      o << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(top + ph + 16) << "\" text-anchor=\"middle\">"
        << escape(spec.x_tick_names[k]) << "</text>\n";
    }
  } else {
    for (int k = 0; k <= 5; ++k) {
      const double x = rx.lo + (rx.hi - rx.lo) * k / 5.0;
      o << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(px(x)) << "\" y2=\""
        << fmt(top + ph + 4) << "\" stroke=\"black\"/>";
      o << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(top + ph + 16) << "\" text-anchor=\"middle\">"
        << fmt(x, "%.4g") << "</text>\n";
    }
  }
  o << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(spec.height - 12.0) << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(16 " << fmt(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.y_label) << "</text>\n";

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const auto& ser = spec.series[s];
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" data-series=\"" << escape(ser.name)
      << "\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < ser.xs.size() && k < ser.ys.size(); ++k) {
      if (!std::isfinite(ser.ys[k]) || !std::isfinite(ser.xs[k])) continue;
      o << (first ? "" : " ") << fmt(px(ser.xs[k])) << ',' << fmt(py(ser.ys[k]));
      first = false;
    }
    o << "\"/>\n";
    const double ly = top + 12 + 16.0 * static_cast<double>(s);
    o << "<line x1=\"" << fmt(left + pw + 10) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(left + pw + 28)
      << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << fmt(left + pw + 32) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(ser.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace aeg::cli
