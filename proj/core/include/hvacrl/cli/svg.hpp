#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hvacrl::cli {

// Minimal self-contained SVG plotting: enough for learning curves, day
// traces, and grouped cost bars. Non-finite points split a polyline.

struct Series {
  std::string label;
  std::string color;  // empty picks from the default palette
  std::vector<double> x;
  std::vector<double> y;
  bool step = false;  // hold each y until the next x (limit profiles)
  bool dashed = false;
  double stroke_width = 1.6;
};

struct Band {
  std::string color;
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
  double opacity = 0.22;
};

struct Panel {
  std::string content;  // a <g> subtree sized width x height
  double width = 0.0;
  double height = 0.0;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Band> bands;
  std::vector<Series> series;
  double width = 880.0;
  double height = 330.0;
  // The x axis spans exactly the data range; only y is padded.
  Panel panel() const;
  std::string render() const;
};

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> series_labels;
  std::vector<std::string> group_labels;
  std::vector<std::vector<double>> values;  // [group][series]
  double width = 880.0;
  double height = 360.0;
  Panel panel() const;
  std::string render() const;
};

std::string svg_document(const std::vector<Panel>& panels);
void write_svg(const std::filesystem::path& path, const std::string& document);
std::string xml_escape(const std::string& text);

}  // namespace hvacrl::cli
