#include "klan/pipeline/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "klan/error.hpp"

namespace klan::pipeline {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#3a7d44", "#8c6bb1",
                          "#e08214", "#4d4d4d"};
constexpr int kPaletteSize = 6;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[48];
  double a = std::fabs(v);
  if (a != 0.0 && (a >= 10000.0 || a < 0.01))
    std::snprintf(buf, sizeof(buf), "%.2e", v);
  else
    std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range pad_range(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi)))
    throw DataError("chart: non-finite data range");
  if (lo > hi) std::swap(lo, hi);
  double span = hi - lo;
  if (span <= 0.0) span = std::max(std::fabs(hi), 1.0);
  return {lo - 0.05 * span, hi + 0.05 * span};
}

double sx(double x, const Range& r) {
  return kMarginLeft + (x - r.lo) / (r.hi - r.lo) * (kWidth - kMarginLeft - kMarginRight);
}

double sy(double y, const Range& r) {
  return kHeight - kMarginBottom -
         (y - r.lo) / (r.hi - r.lo) * (kHeight - kMarginTop - kMarginBottom);
}

void open_svg(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\" fill=\"#222\">"
      << escape(title) << "</text>\n";
}

void axes(std::ofstream& out, const Range& xr, const Range& yr,
          const std::string& x_label, const std::string& y_label) {
  int x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  int y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1
      << "\" y2=\"" << y0 << "\" stroke=\"#333\"/>\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
      << "\" y2=\"" << y1 << "\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    double px = sx(fx, xr);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << y0 << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << y0 + 4 << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\"" << y0 + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
        << "fill=\"#333\">" << fmt_tick(fx) << "</text>\n";
    double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    double py = sy(fy, yr);
    out << "<line x1=\"" << x0 - 4 << "\" y1=\"" << fmt(py) << "\" x2=\"" << x0
        << "\" y2=\"" << fmt(py) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << x0 - 8 << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
        << "fill=\"#333\">" << fmt_tick(fy) << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "fill=\"#222\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (y0 + y1) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "fill=\"#222\" transform=\"rotate(-90 16 " << (y0 + y1) / 2 << ")\">"
      << escape(y_label) << "</text>\n";
}

}  // namespace

void write_line_chart(const std::string& file, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  if (series.empty()) throw DataError("chart: no series");
  double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
  bool first = true;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw DataError("chart: bad series '" + s.label + "'");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw DataError("chart: non-finite point in '" + s.label + "'");
      if (first) {
        xlo = xhi = s.x[i];
        ylo = yhi = s.y[i];
        first = false;
      }
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  Range xr = pad_range(xlo, xhi);
  Range yr = pad_range(ylo, yhi);

  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file);
  open_svg(out, title);
  axes(out, xr, yr, x_label, y_label);

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % kPaletteSize];
    // thin dense polylines stay readable; downsample anything huge
    std::size_t step = std::max<std::size_t>(1, s.x.size() / 512);
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); i += step)
      out << fmt(sx(s.x[i], xr)) << "," << fmt(sy(s.y[i], yr)) << " ";
    std::size_t last = s.x.size() - 1;
    out << fmt(sx(s.x[last], xr)) << "," << fmt(sy(s.y[last], yr));
    out << "\"/>\n";
    int ly = kMarginTop + 14 * static_cast<int>(si);
    out << "<rect x=\"" << kWidth - kMarginRight - 130 << "\" y=\"" << ly - 8
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << kWidth - kMarginRight - 115 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">"
        << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw DataError("write failed: " + file);
}

void write_bar_chart(const std::string& file, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::pair<std::string, double>>& bars) {
  if (bars.empty()) throw DataError("chart: no bars");
  double ylo = 0.0, yhi = 0.0;
  for (const auto& [label, v] : bars) {
    if (!std::isfinite(v)) throw DataError("chart: non-finite bar '" + label + "'");
    ylo = std::min(ylo, v);
    yhi = std::max(yhi, v);
  }
  Range yr = pad_range(ylo, yhi);

  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file);
  open_svg(out, title);
  Range xr{0.0, static_cast<double>(bars.size())};
  axes(out, xr, yr, "", y_label);
  // hide the numeric x ticks behind a band, bars carry their own labels
  out << "<rect x=\"" << kMarginLeft - 2 << "\" y=\"" << kHeight - kMarginBottom + 6
      << "\" width=\"" << kWidth - kMarginLeft - kMarginRight + 4
      << "\" height=\"16\" fill=\"white\"/>\n";

  double plot_w = kWidth - kMarginLeft - kMarginRight;
  double slot = plot_w / static_cast<double>(bars.size());
  double bw = slot * 0.6;
  double base = sy(std::max(0.0, yr.lo), yr);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    double cx = kMarginLeft + slot * (static_cast<double>(i) + 0.5);
    double top = sy(bars[i].second, yr);
    double y = std::min(top, base);
    double h = std::fabs(base - top);
    out << "<rect x=\"" << fmt(cx - bw / 2) << "\" y=\"" << fmt(y) << "\" width=\""
        << fmt(bw) << "\" height=\"" << fmt(h) << "\" fill=\""
        << kPalette[i % kPaletteSize] << "\"/>\n";
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << kHeight - kMarginBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
        << "fill=\"#333\">" << escape(bars[i].first) << "</text>\n";
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(y - 4)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\" "
        << "fill=\"#333\">" << fmt_tick(bars[i].second) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw DataError("write failed: " + file);
}

}  // namespace klan::pipeline
