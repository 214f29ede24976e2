#pragma once

#include <filesystem>
#include <vector>

namespace hvacrl::cli {

// Plot generation inputs. Curve lists hold one CSV per training seed; the
// two trace paths must be given together (the same day with and without its
// DR event). Every named file must exist and contain at least one data row.
struct ReportInputs {
  std::vector<std::filesystem::path> es_curves;
  std::vector<std::filesystem::path> ppo_curves;
  std::filesystem::path summary_csv;
  std::filesystem::path dr_trace_csv;
  std::filesystem::path non_dr_trace_csv;
  std::filesystem::path out_dir;
};

struct ReportOutputs {
  std::vector<std::filesystem::path> files;
};

// Renders learning_curves.svg (per-seed curves with a min/max band),
// traces.svg (temperatures, flows, discharge air, power against the limit
// profile), and cost_bars.svg (grouped by DR / non-DR), honouring whichever
// inputs are present. No inputs at all is an error, as is an empty or
// malformed CSV; nothing is written in that case.
ReportOutputs cmd_report(const ReportInputs& inputs);

}  // namespace hvacrl::cli
