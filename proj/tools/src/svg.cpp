#include "lloss_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lloss/experiment.hpp"

namespace lloss::cli {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
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
    if (lo > hi) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

struct Frame {
  double x0, y0, w, h;
  Range xr, yr;

  double px(double v) const { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * w; }
  double py(double v) const { return y0 + h - (v - yr.lo) / (yr.hi - yr.lo) * h; }
};

void axes(std::ostringstream& out, const Frame& f, const std::string& x_label, const std::string& y_label) {
  out << "<rect x=\"" << num(f.x0) << "\" y=\"" << num(f.y0) << "\" width=\"" << num(f.w) << "\" height=\""
      << num(f.h) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 4;
    const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(f.y0 + f.h + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    out << "<text x=\"" << num(f.x0 - 6) << "\" y=\"" << num(f.py(yv) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
  }
  out << "<text x=\"" << num(f.x0 + f.w / 2) << "\" y=\"" << num(f.y0 + f.h + 36)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  out << "<text transform=\"translate(" << num(f.x0 - 50) << "," << num(f.y0 + f.h / 2)
      << ") rotate(-90)\" font-size=\"12\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";
}

}  // namespace

std::string xml_escape(const std::string& s) {
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

std::string render_curves(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<CurveSeries>& series) {
  Frame f{kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom, {}, {}};
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      f.xr.add(s.x[i]);
      f.yr.add(s.mean[i] - s.std[i]);
      f.yr.add(s.mean[i] + s.std[i]);
    }
  }
  f.xr.settle();
  f.yr.settle();

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">" << xml_escape(title)
      << "</text>\n";
  axes(out, f, x_label, y_label);

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    out << "<g class=\"series\" data-strategy=\"" << xml_escape(s.label) << "\">\n";

    std::string upper, lower, line;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.mean[i])) continue;
      const std::string x = num(f.px(s.x[i]));
      upper += (upper.empty() ? "M" : "L") + x + "," + num(f.py(s.mean[i] + s.std[i])) + " ";
      lower = "L" + x + "," + num(f.py(s.mean[i] - s.std[i])) + " " + lower;
      line += (line.empty() ? "M" : "L") + x + "," + num(f.py(s.mean[i])) + " ";
    }
    if (!upper.empty()) {
      out << "<path class=\"band\" d=\"" << upper << lower << "Z\" fill=\"" << color
          << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
      out << "<path class=\"mean\" d=\"" << line << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<circle class=\"point\" data-x=\"" << format_real(s.x[i]) << "\" data-mean=\""
          << format_real(s.mean[i]) << "\" data-std=\"" << format_real(s.std[i]) << "\"";
      if (std::isfinite(s.mean[i])) {
        out << " cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.mean[i])) << "\" r=\"3\" fill=\"" << color
            << "\"";
      } else {
        out << " r=\"0\"";
      }
      out << "/>\n";
    }
    out << "</g>\n";

    const double ly = kTop + 12 + 20 * static_cast<double>(k);
    const double lx = kWidth - kRight + 15;
    out << "<g class=\"legend\"><line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << num(lx + 28)
        << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">" << xml_escape(s.label) << "</text></g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_scatter(const std::string& title, const std::string& x_label,
                           const std::vector<ScatterSeries>& panels) {
  const double panel_w = 300, panel_h = 260, gap = 80;
  const double width = kLeft + static_cast<double>(panels.size()) * (panel_w + gap);
  const double height = kTop + panel_h + kBottom;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(width / 2) << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">" << xml_escape(title)
      << "</text>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto& p = panels[k];
    Frame f{kLeft + static_cast<double>(k) * (panel_w + gap), kTop, panel_w, panel_h, {}, {}};
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      f.xr.add(p.x[i]);
      f.yr.add(p.y[i]);
    }
    f.xr.settle();
    f.yr.settle();
    axes(out, f, x_label, p.label);
    out << "<g class=\"scatter\" data-label=\"" << xml_escape(p.label) << "\" data-count=\"" << p.x.size() << "\">\n";
    for (std::size_t i = 0; i < p.x.size(); ++i) {
      if (!std::isfinite(p.x[i]) || !std::isfinite(p.y[i])) continue;
      out << "<circle cx=\"" << num(f.px(p.x[i])) << "\" cy=\"" << num(f.py(p.y[i])) << "\" r=\"1.6\" fill=\""
          << kPalette[k % std::size(kPalette)] << "\" fill-opacity=\"0.5\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace lloss::cli
