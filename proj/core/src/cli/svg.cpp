#include "hvacrl/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hvacrl::cli {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 46.0;

std::string fmt(double v) {
  if (!std::isfinite(v)) return "0";
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
  void ensure_span() {
    if (!valid()) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step - 1e-9) * step;
  for (; t <= hi + 1e-9 * span; t += step) {
    const double snapped = std::abs(t) < step * 1e-6 ? 0.0 : t;
    ticks.push_back(snapped);
  }
  return ticks;
}

class Canvas {
 public:
  Canvas(double width, double height, Range xr, Range yr)
      : width_(width), height_(height), xr_(xr), yr_(yr) {
    xr_.ensure_span();
    yr_.ensure_span();
  }

  double px(double x) const {
    return kMarginLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * (width_ - kMarginLeft - kMarginRight);
  }
  double py(double y) const {
    return height_ - kMarginBottom -
           (y - yr_.lo) / (yr_.hi - yr_.lo) * (height_ - kMarginTop - kMarginBottom);
  }
  const Range& xr() const { return xr_; }
  const Range& yr() const { return yr_; }
  double width() const { return width_; }
  double height() const { return height_; }

  void axes(std::ostringstream& os, const std::string& title, const std::string& x_label,
            const std::string& y_label, bool x_ticks = true) const {
    os << "<rect x=\"" << fmt(kMarginLeft) << "\" y=\"" << fmt(kMarginTop) << "\" width=\""
       << fmt(width_ - kMarginLeft - kMarginRight) << "\" height=\""
       << fmt(height_ - kMarginTop - kMarginBottom)
       << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    if (x_ticks) {
      for (double t : nice_ticks(xr_.lo, xr_.hi)) {
        const double x = px(t);
        os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(height_ - kMarginBottom) << "\" x2=\""
           << fmt(x) << "\" y2=\"" << fmt(height_ - kMarginBottom + 4) << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(height_ - kMarginBottom + 17)
           << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#222\">" << tick_label(t)
           << "</text>\n";
      }
    }
    for (double t : nice_ticks(yr_.lo, yr_.hi)) {
      const double y = py(t);
      os << "<line x1=\"" << fmt(kMarginLeft - 4) << "\" y1=\"" << fmt(y) << "\" x2=\""
         << fmt(kMarginLeft) << "\" y2=\"" << fmt(y) << "\" stroke=\"#444\"/>\n";
      os << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(y) << "\" x2=\""
         << fmt(width_ - kMarginRight) << "\" y2=\"" << fmt(y)
         << "\" stroke=\"#ddd\" stroke-width=\"0.6\"/>\n";
      os << "<text x=\"" << fmt(kMarginLeft - 8) << "\" y=\"" << fmt(y + 3.5)
         << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#222\">" << tick_label(t)
         << "</text>\n";
    }
    if (!title.empty())
      os << "<text x=\"" << fmt(width_ / 2) << "\" y=\"" << fmt(kMarginTop - 12)
         << "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111\">" << xml_escape(title)
         << "</text>\n";
    if (!x_label.empty())
      os << "<text x=\"" << fmt(width_ / 2) << "\" y=\"" << fmt(height_ - 10)
         << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222\">" << xml_escape(x_label)
         << "</text>\n";
    if (!y_label.empty())
      os << "<text x=\"14\" y=\"" << fmt(height_ / 2)
         << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222\" transform=\"rotate(-90 14 "
         << fmt(height_ / 2) << ")\">" << xml_escape(y_label) << "</text>\n";
  }

 private:
  double width_;
  double height_;
  Range xr_;
  Range yr_;
};

void render_polyline(std::ostringstream& os, const Canvas& canvas, const Series& s,
                     const std::string& color) {
  std::vector<std::pair<double, double>> points;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.step && i > 0) points.emplace_back(s.x[i], s.y[i - 1]);
    points.emplace_back(s.x[i], s.y[i]);
  }
  std::ostringstream path;
  bool pen_down = false;
  for (const auto& [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      pen_down = false;
      continue;
    }
    path << (pen_down ? " L " : " M ") << fmt(canvas.px(x)) << " " << fmt(canvas.py(y));
    pen_down = true;
  }
  const std::string d = path.str();
  if (d.empty()) return;
  os << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
     << fmt(s.stroke_width) << "\"";
  if (s.dashed) os << " stroke-dasharray=\"6 4\"";
  os << "/>\n";
}

void render_legend(std::ostringstream& os, const Canvas& canvas,
                   const std::vector<std::pair<std::string, std::string>>& entries,
                   const std::vector<bool>& dashed) {
  double y = kMarginTop + 14.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first.empty()) continue;
    const double x = canvas.width() - kMarginRight - 150.0;
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y - 4) << "\" x2=\"" << fmt(x + 24)
       << "\" y2=\"" << fmt(y - 4) << "\" stroke=\"" << entries[i].second
       << "\" stroke-width=\"2\"";
    if (i < dashed.size() && dashed[i]) os << " stroke-dasharray=\"6 4\"";
    os << "/>\n";
    os << "<text x=\"" << fmt(x + 30) << "\" y=\"" << fmt(y) << "\" font-size=\"11\" fill=\"#222\">"
       << xml_escape(entries[i].first) << "</text>\n";
    y += 15.0;
  }
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

Panel LinePlot::panel() const {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  for (const auto& b : bands) {
    for (double v : b.x) xr.add(v);
    for (double v : b.lo) yr.add(v);
    for (double v : b.hi) yr.add(v);
  }
  if (yr.valid()) {
    const double pad = 0.06 * (yr.hi - yr.lo + 1e-12);
    yr.lo -= pad;
    yr.hi += pad;
  }
  const Canvas canvas(width, height, xr, yr);

  std::ostringstream os;
  for (const auto& b : bands) {
    std::ostringstream poly;
    bool any = false;
    for (std::size_t i = 0; i < b.x.size(); ++i) {
      if (!std::isfinite(b.x[i]) || !std::isfinite(b.hi[i])) continue;
      poly << fmt(canvas.px(b.x[i])) << "," << fmt(canvas.py(b.hi[i])) << " ";
      any = true;
    }
    for (std::size_t i = b.x.size(); i-- > 0;) {
      if (!std::isfinite(b.x[i]) || !std::isfinite(b.lo[i])) continue;
      poly << fmt(canvas.px(b.x[i])) << "," << fmt(canvas.py(b.lo[i])) << " ";
    }
    if (any)
      os << "<polygon points=\"" << poly.str() << "\" fill=\"" << b.color << "\" opacity=\""
         << fmt(b.opacity) << "\"/>\n";
  }
  std::vector<std::pair<std::string, std::string>> legend;
  std::vector<bool> legend_dash;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::string color =
        series[i].color.empty() ? kPalette[i % kPaletteSize] : series[i].color;
    render_polyline(os, canvas, series[i], color);
    legend.emplace_back(series[i].label, color);
    legend_dash.push_back(series[i].dashed);
  }
  canvas.axes(os, title, x_label, y_label);
  render_legend(os, canvas, legend, legend_dash);
  return Panel{"<g>\n" + os.str() + "</g>\n", width, height};
}

std::string LinePlot::render() const { return svg_document({panel()}); }

Panel BarChart::panel() const {
  if (values.size() != group_labels.size())
    throw std::invalid_argument("bar chart: one value row per group required");
  Range yr;
  yr.add(0.0);
  for (const auto& row : values) {
    if (row.size() != series_labels.size())
      throw std::invalid_argument("bar chart: one value per series required");
    for (double v : row) yr.add(v);
  }
  if (yr.valid()) yr.hi += 0.08 * (yr.hi - yr.lo + 1e-12);
  Range xr;
  xr.add(0.0);
  xr.add(1.0);
  const Canvas canvas(width, height, xr, yr);

  const double plot_w = width - kMarginLeft - kMarginRight;
  const std::size_t groups = group_labels.size();
  const std::size_t per_group = series_labels.size();
  const double group_w = plot_w / std::max<std::size_t>(1, groups);
  const double bar_w = 0.72 * group_w / std::max<std::size_t>(1, per_group);

  std::ostringstream os;
  for (std::size_t g = 0; g < groups; ++g) {
    const double center = kMarginLeft + (g + 0.5) * group_w;
    const double first = center - 0.5 * bar_w * per_group;
    for (std::size_t s = 0; s < per_group; ++s) {
      const double v = values[g][s];
      if (!std::isfinite(v)) continue;
      const double x = first + s * bar_w;
      const double y0 = canvas.py(std::max(0.0, v));
      const double y1 = canvas.py(std::min(0.0, v));
      os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(bar_w * 0.92)
         << "\" height=\"" << fmt(std::max(0.5, y1 - y0)) << "\" fill=\""
         << kPalette[s % kPaletteSize] << "\"/>\n";
      os << "<text x=\"" << fmt(x + 0.46 * bar_w) << "\" y=\"" << fmt(y0 - 4)
         << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#333\">" << tick_label(v)
         << "</text>\n";
    }
    os << "<text x=\"" << fmt(center) << "\" y=\"" << fmt(height - kMarginBottom + 17)
       << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222\">" << xml_escape(group_labels[g])
       << "</text>\n";
  }
  canvas.axes(os, title, "", y_label, false);
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t s = 0; s < per_group; ++s)
    legend.emplace_back(series_labels[s], kPalette[s % kPaletteSize]);
  render_legend(os, canvas, legend, {});
  return Panel{"<g>\n" + os.str() + "</g>\n", width, height};
}

std::string BarChart::render() const { return svg_document({panel()}); }

std::string svg_document(const std::vector<Panel>& panels) {
  double width = 0.0;
  double height = 0.0;
  for (const auto& p : panels) {
    width = std::max(width, p.width);
    height += p.height;
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
     << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g font-family=\"Helvetica, Arial, sans-serif\">\n";
  double offset = 0.0;
  for (const auto& p : panels) {
    os << "<g transform=\"translate(0 " << fmt(offset) << ")\">\n" << p.content << "</g>\n";
    offset += p.height;
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void write_svg(const std::filesystem::path& path, const std::string& document) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("svg: cannot write " + path.string());
  out << document;
  if (!out) throw std::runtime_error("svg: write failed for " + path.string());
}

}  // namespace hvacrl::cli
