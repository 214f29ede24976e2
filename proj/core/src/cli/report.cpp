#include "hvacrl/cli/report.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "hvacrl/cli/svg.hpp"
#include "hvacrl/common/csv.hpp"

namespace hvacrl::cli {

namespace {

CsvTable read_nonempty(const std::filesystem::path& path) {
  CsvTable table = CsvTable::read(path);
  if (table.rows.empty())
    throw std::runtime_error("report: no data rows in " + path.string());
  return table;
}

Panel curve_panel(const std::string& title, const std::vector<CsvTable>& tables) {
  LinePlot plot;
  plot.title = title;
  plot.x_label = "iteration";
  plot.y_label = "evaluation cost";

  std::size_t common = std::numeric_limits<std::size_t>::max();
  for (const auto& t : tables) common = std::min(common, t.rows.size());

  if (tables.size() > 1) {
    Band band;
    band.color = "#1f77b4";
    const int it_col = tables.front().require_column("iteration");
    for (std::size_t r = 0; r < common; ++r) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& t : tables) {
        const double v = t.number(r, t.require_column("eval_cost"));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      band.x.push_back(tables.front().number(r, it_col));
      band.lo.push_back(lo);
      band.hi.push_back(hi);
    }
    plot.bands.push_back(std::move(band));
  }

  for (std::size_t s = 0; s < tables.size(); ++s) {
    const auto& t = tables[s];
    Series series;
    series.label = "seed " + std::to_string(s);
    const int it_col = t.require_column("iteration");
    const int cost_col = t.require_column("eval_cost");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      series.x.push_back(t.number(r, it_col));
      series.y.push_back(t.number(r, cost_col));
    }
    plot.series.push_back(std::move(series));
  }
  return plot.panel();
}

int zone_count_of(const CsvTable& trace) {
  int zones = 0;
  while (trace.column("t_zone_" + std::to_string(zones + 1)) >= 0) ++zones;
  if (zones == 0) throw std::runtime_error("report: trace has no t_zone_* columns");
  return zones;
}

std::vector<double> column_values(const CsvTable& t, const std::string& name) {
  const int col = t.require_column(name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(t.number(r, col));
  return out;
}

std::vector<double> hours_axis(const CsvTable& t) {
  const int col = t.require_column("step");
  std::vector<double> out;
  out.reserve(t.rows.size());
  const double scale = 24.0 / static_cast<double>(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(t.number(r, col) * scale);
  return out;
}

Series dashed_legend_entry(const std::string& label) {
  Series s;
  s.label = label;
  s.color = "#777777";
  s.dashed = true;
  return s;
}

std::vector<Panel> trace_panels(const CsvTable& dr, const CsvTable& nodr) {
  const int zones = zone_count_of(dr);
  const auto hours_dr = hours_axis(dr);
  const auto hours_nodr = hours_axis(nodr);

  LinePlot temps;
  temps.title = "Zone temperatures, DR day (solid) vs non-DR day (dashed)";
  temps.x_label = "hour of day";
  temps.y_label = "degC";
  for (int i = 1; i <= zones; ++i) {
    Series s;
    s.label = "zone " + std::to_string(i);
    s.x = hours_dr;
    s.y = column_values(dr, "t_zone_" + std::to_string(i));
    temps.series.push_back(std::move(s));
  }
  for (int i = 1; i <= zones; ++i) {
    Series s;
    s.x = hours_nodr;
    s.y = column_values(nodr, "t_zone_" + std::to_string(i));
    s.dashed = true;
    s.stroke_width = 1.0;
    temps.series.push_back(std::move(s));
  }

  LinePlot flows;
  flows.title = "Zone supply flows, DR day";
  flows.x_label = "hour of day";
  flows.y_label = "kg/s";
  for (int i = 1; i <= zones; ++i) {
    Series s;
    s.label = "zone " + std::to_string(i);
    s.x = hours_dr;
    s.y = column_values(dr, "mdot_" + std::to_string(i));
    flows.series.push_back(std::move(s));
  }

  LinePlot tda;
  tda.title = "Discharge air temperature";
  tda.x_label = "hour of day";
  tda.y_label = "degC";
  {
    Series s;
    s.label = "DR day";
    s.x = hours_dr;
    s.y = column_values(dr, "t_da");
    tda.series.push_back(std::move(s));
    Series s2;
    s2.label = "non-DR day";
    s2.x = hours_nodr;
    s2.y = column_values(nodr, "t_da");
    s2.dashed = true;
    tda.series.push_back(std::move(s2));
  }

  LinePlot power;
  power.title = "Building power against the limit profile";
  power.x_label = "hour of day";
  power.y_label = "kW";
  {
    Series s;
    s.label = "power (DR)";
    s.x = hours_dr;
    s.y = column_values(dr, "power_kw");
    power.series.push_back(std::move(s));
    Series s2;
    s2.label = "power (non-DR)";
    s2.x = hours_nodr;
    s2.y = column_values(nodr, "power_kw");
    s2.dashed = true;
    power.series.push_back(std::move(s2));
    Series limit;
    limit.label = "limit (DR)";
    limit.color = "#d62728";
    limit.x = hours_dr;
    limit.y = column_values(dr, "p_limit_kw");
    limit.step = true;
    limit.stroke_width = 2.0;
    power.series.push_back(std::move(limit));
  }
  power.series.push_back(dashed_legend_entry("non-DR (dashed)"));

  return {temps.panel(), flows.panel(), tda.panel(), power.panel()};
}

Panel bars_panel(const CsvTable& summary) {
  const int controller_col = summary.require_column("controller");
  const int group_col = summary.require_column("group");
  const int cost_col = summary.require_column("mean_cost");

  std::vector<std::string> controllers;
  for (std::size_t r = 0; r < summary.rows.size(); ++r) {
    const std::string& name = summary.cell(r, controller_col);
    if (std::find(controllers.begin(), controllers.end(), name) == controllers.end())
      controllers.push_back(name);
  }

  BarChart chart;
  chart.title = "Mean episodic cost over the test days";
  chart.y_label = "cost";
  chart.series_labels = controllers;
  chart.group_labels = {"non-DR scenarios", "DR scenarios"};
  chart.values.assign(2, std::vector<double>(controllers.size(),
                                             std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t r = 0; r < summary.rows.size(); ++r) {
    const std::string& group = summary.cell(r, group_col);
    if (group != "dr" && group != "non_dr")
      throw std::runtime_error("report: unknown summary group \"" + group + "\"");
    const std::size_t g = group == "dr" ? 1 : 0;
    const auto it =
        std::find(controllers.begin(), controllers.end(), summary.cell(r, controller_col));
    chart.values[g][static_cast<std::size_t>(it - controllers.begin())] =
        summary.number(r, cost_col);
  }
  return chart.panel();
}

}  // namespace

ReportOutputs cmd_report(const ReportInputs& inputs) {
  const bool have_curves = !inputs.es_curves.empty() || !inputs.ppo_curves.empty();
  const bool have_summary = !inputs.summary_csv.empty();
  const bool have_dr = !inputs.dr_trace_csv.empty();
  const bool have_nodr = !inputs.non_dr_trace_csv.empty();
  if (!have_curves && !have_summary && !have_dr && !have_nodr)
    throw std::invalid_argument("report: no inputs given");
  if (have_dr != have_nodr)
    throw std::invalid_argument("report: DR and non-DR traces must be given together");
  if (inputs.out_dir.empty()) throw std::invalid_argument("report: no output directory");

  // Read and validate everything before writing anything.
  std::vector<CsvTable> es_tables;
  for (const auto& p : inputs.es_curves) es_tables.push_back(read_nonempty(p));
  std::vector<CsvTable> ppo_tables;
  for (const auto& p : inputs.ppo_curves) ppo_tables.push_back(read_nonempty(p));
  std::vector<Panel> curve_panels;
  if (!es_tables.empty()) curve_panels.push_back(curve_panel("Stage one search", es_tables));
  if (!ppo_tables.empty()) curve_panels.push_back(curve_panel("Stage two fine-tuning", ppo_tables));

  std::vector<Panel> traces;
  if (have_dr) {
    const CsvTable dr = read_nonempty(inputs.dr_trace_csv);
    const CsvTable nodr = read_nonempty(inputs.non_dr_trace_csv);
    traces = trace_panels(dr, nodr);
  }

  std::vector<Panel> bars;
  if (have_summary) bars.push_back(bars_panel(read_nonempty(inputs.summary_csv)));

  std::filesystem::create_directories(inputs.out_dir);
  ReportOutputs out;
  if (!curve_panels.empty()) {
    const auto path = inputs.out_dir / "learning_curves.svg";
    write_svg(path, svg_document(curve_panels));
    out.files.push_back(path);
  }
  if (!traces.empty()) {
    const auto path = inputs.out_dir / "traces.svg";
    write_svg(path, svg_document(traces));
    out.files.push_back(path);
  }
  if (!bars.empty()) {
    const auto path = inputs.out_dir / "cost_bars.svg";
    write_svg(path, svg_document(bars));
    out.files.push_back(path);
  }
  return out;
}

}  // namespace hvacrl::cli
