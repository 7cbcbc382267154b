#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "rubricjudge/svg.hpp"

namespace rubricjudge::svg {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr double kLeft = 70.0;
constexpr double kRight = 650.0;
constexpr double kTop = 56.0;
constexpr double kBottom = 420.0;

const char* const kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                                "#66ccee", "#aa3377", "#bbbbbb", "#222222"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Scale {
  double domain_min = 0.0;
  double domain_max = 1.0;
  double range_min = 0.0;
  double range_max = 1.0;

  double operator()(double v) const {
    if (domain_max == domain_min) return (range_min + range_max) / 2.0;
    return range_min + (v - domain_min) / (domain_max - domain_min) * (range_max - range_min);
  }
};

// Expands [lo, hi] outward to tenths so whiskers and markers stay inside the
// plot area.
std::pair<double, double> padded_domain(double lo, double hi) {
  if (lo > hi) std::swap(lo, hi);
  double out_lo = std::floor(lo * 10.0) / 10.0;
  double out_hi = std::ceil(hi * 10.0) / 10.0;
  if (out_lo == out_hi) {
    out_lo -= 0.1;
    out_hi += 0.1;
  }
  return {out_lo, out_hi};
}

void open_svg(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(kWidth / 2.0)
      << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
      << escape(title) << "</text>\n";
}

void draw_frame(std::ostringstream& out) {
  out << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
      << fmt(kRight - kLeft) << "\" height=\"" << fmt(kBottom - kTop)
      << "\" fill=\"none\" stroke=\"#666666\"/>\n";
}

void draw_y_axis(std::ostringstream& out, const Scale& y, const std::string& label, double x_pos,
                 const char* anchor, double label_x, bool gridlines) {
  for (int i = 0; i <= 5; ++i) {
    const double v = y.domain_min + (y.domain_max - y.domain_min) * i / 5.0;
    const double py = y(v);
    if (gridlines) {
      out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kRight)
          << "\" y2=\"" << fmt(py) << "\" stroke=\"#dddddd\"/>\n";
    }
    out << "<text x=\"" << fmt(x_pos) << "\" y=\"" << fmt(py + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"" << anchor << "\">"
        << fmt(v) << "</text>\n";
  }
  out << "<text x=\"" << fmt(label_x) << "\" y=\"" << fmt((kTop + kBottom) / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << fmt(label_x) << " " << fmt((kTop + kBottom) / 2.0) << ")\">" << escape(label)
      << "</text>\n";
}

void draw_legend(std::ostringstream& out, const std::vector<std::string>& names,
                 std::size_t color_offset = 0) {
  double ly = kTop + 10.0;
  for (std::size_t s = 0; s < names.size(); ++s) {
    const char* color = kPalette[(s + color_offset) % kPaletteSize];
    out << "<rect x=\"" << fmt(kRight - 180.0) << "\" y=\"" << fmt(ly - 9.0)
        << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << fmt(kRight - 162.0) << "\" y=\"" << fmt(ly + 1.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(names[s]) << "</text>\n";
    ly += 18.0;
  }
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool first = true;
  std::vector<double> xs;
  for (const Series& s : series) {
    for (const auto& [px, py] : s.points) {
      if (first) {
        x_min = x_max = px;
        y_min = y_max = py;
        first = false;
      }
      x_min = std::min(x_min, px);
      x_max = std::max(x_max, px);
      y_min = std::min(y_min, py);
      y_max = std::max(y_max, py);
      if (std::find(xs.begin(), xs.end(), px) == xs.end()) xs.push_back(px);
    }
  }
  std::sort(xs.begin(), xs.end());
  const auto [ylo, yhi] = padded_domain(std::min(y_min, 0.0), std::max(y_max, 1.0));
  if (x_min == x_max) {
    x_min -= 0.5;
    x_max += 0.5;
  }

  Scale sx{x_min, x_max, kLeft, kRight};
  Scale sy{ylo, yhi, kBottom, kTop};

  std::ostringstream out;
  open_svg(out, title);
  draw_y_axis(out, sy, y_label, kLeft - 8.0, "end", 20.0, true);

  const bool tick_per_x = xs.size() <= 12;
  const std::size_t n_ticks = tick_per_x ? xs.size() : 6;
  for (std::size_t i = 0; i < n_ticks; ++i) {
    const double v =
        tick_per_x ? xs[i] : x_min + (x_max - x_min) * static_cast<double>(i) / (n_ticks - 1);
    const double px = sx(v);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << fmt(kBottom + 5.0) << "\" stroke=\"#666666\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kBottom + 18.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(v)
        << "</text>\n";
  }
  out << "<text x=\"" << fmt((kLeft + kRight) / 2.0) << "\" y=\"" << fmt(kBottom + 38.0)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  draw_frame(out);

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    std::ostringstream path;
    for (std::size_t i = 0; i < series[s].points.size(); ++i) {
      path << (i == 0 ? "M" : " L") << fmt(sx(series[s].points[i].first)) << " "
           << fmt(sy(series[s].points[i].second));
    }
    out << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    for (const auto& [px, py] : series[s].points) {
      out << "<circle cx=\"" << fmt(sx(px)) << "\" cy=\"" << fmt(sy(py))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
  }

  std::vector<std::string> names;
  for (const Series& s : series) names.push_back(s.name);
  draw_legend(out, names);
  out << "</svg>\n";
  return out.str();
}

std::string bar_line_chart(const std::string& title, const std::string& bar_axis_label,
                           const std::vector<Bar>& bars, const std::string& line_axis_label,
                           const std::vector<Bar>& line_points) {
  double bar_lo = 0.0, bar_hi = 1.0;
  for (const Bar& b : bars) {
    bar_lo = std::min({bar_lo, b.value, b.lo});
    bar_hi = std::max({bar_hi, b.value, b.hi});
  }
  double line_lo = 0.0, line_hi = 1.0;
  for (const Bar& b : line_points) {
    line_lo = std::min({line_lo, b.value, b.lo});
    line_hi = std::max({line_hi, b.value, b.hi});
  }
  const auto [bl, bh] = padded_domain(bar_lo, bar_hi);
  const auto [ll, lh] = padded_domain(line_lo, line_hi);
  Scale sy_bar{bl, bh, kBottom, kTop};
  Scale sy_line{ll, lh, kBottom, kTop};

  std::ostringstream out;
  open_svg(out, title);
  draw_y_axis(out, sy_bar, bar_axis_label, kLeft - 8.0, "end", 20.0, true);
  draw_y_axis(out, sy_line, line_axis_label, kRight + 8.0, "start", kWidth - 14.0, false);
  draw_frame(out);

  const std::size_t n = bars.size();
  const double slot = (kRight - kLeft) / std::max<std::size_t>(n, 1);
  const double bar_width = slot * 0.55;
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double top = sy_bar(bars[i].value);
    const double base = sy_bar(std::max(bl, 0.0));
    out << "<rect x=\"" << fmt(cx - bar_width / 2.0) << "\" y=\"" << fmt(std::min(top, base))
        << "\" width=\"" << fmt(bar_width) << "\" height=\"" << fmt(std::abs(base - top))
        << "\" fill=\"" << kPalette[0] << "\"/>\n";
    if (bars[i].hi > bars[i].lo) {
      out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(sy_bar(bars[i].lo)) << "\" x2=\""
          << fmt(cx) << "\" y2=\"" << fmt(sy_bar(bars[i].hi))
          << "\" stroke=\"#222222\" stroke-width=\"1.5\"/>\n";
    }
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(kBottom + 18.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << escape(bars[i].label) << "</text>\n";
  }

  std::ostringstream path;
  for (std::size_t i = 0; i < line_points.size(); ++i) {
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    path << (i == 0 ? "M" : " L") << fmt(cx) << " " << fmt(sy_line(line_points[i].value));
  }
  out << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << kPalette[1]
      << "\" stroke-width=\"2\"/>\n";
  for (std::size_t i = 0; i < line_points.size(); ++i) {
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    out << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(sy_line(line_points[i].value))
        << "\" r=\"3\" fill=\"" << kPalette[1] << "\"/>\n";
    if (line_points[i].hi > line_points[i].lo) {
      out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(sy_line(line_points[i].lo))
          << "\" x2=\"" << fmt(cx) << "\" y2=\"" << fmt(sy_line(line_points[i].hi))
          << "\" stroke=\"" << kPalette[1] << "\" stroke-width=\"1.5\"/>\n";
    }
  }

  draw_legend(out, {bar_axis_label, line_axis_label});
  out << "</svg>\n";
  return out.str();
}

std::string stacked_bar_chart(const std::string& title, const std::string& y_label,
                              const std::vector<StackColumn>& columns) {
  std::vector<std::string> segment_labels;
  std::map<std::string, std::size_t> color_of;
  for (const StackColumn& col : columns) {
    for (const StackSegment& seg : col.segments) {
      if (color_of.emplace(seg.label, segment_labels.size()).second) {
        segment_labels.push_back(seg.label);
      }
    }
  }

  Scale sy{0.0, 1.0, kBottom, kTop};
  std::ostringstream out;
  open_svg(out, title);
  draw_y_axis(out, sy, y_label, kLeft - 8.0, "end", 20.0, true);
  draw_frame(out);

  const std::size_t n = columns.size();
  const double slot = (kRight - kLeft) / std::max<std::size_t>(n, 1);
  const double bar_width = slot * 0.6;
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    double cum = 0.0;
    for (const StackSegment& seg : columns[i].segments) {
      const double y0 = sy(cum);
      const double y1 = sy(std::min(1.0, cum + seg.fraction));
      out << "<rect x=\"" << fmt(cx - bar_width / 2.0) << "\" y=\"" << fmt(y1) << "\" width=\""
          << fmt(bar_width) << "\" height=\"" << fmt(y0 - y1) << "\" fill=\""
          << kPalette[color_of[seg.label] % kPaletteSize] << "\" stroke=\"white\"/>\n";
      cum += seg.fraction;
    }
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(kBottom + 18.0)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << escape(columns[i].label) << "</text>\n";
  }

  draw_legend(out, segment_labels);
  out << "</svg>\n";
  return out.str();
}

}  // namespace rubricjudge::svg
