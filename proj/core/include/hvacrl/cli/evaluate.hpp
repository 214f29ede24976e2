#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hvacrl/cli/controllers.hpp"
#include "hvacrl/cli/experiment.hpp"

namespace hvacrl::cli {

struct ControllerSpec {
  enum class Kind { Rl, Mpc, RuleBased };
  Kind kind = Kind::RuleBased;
  std::string name;
  std::filesystem::path checkpoint;          // Kind::Rl
  mpc::Variant variant = mpc::Variant::Lin;  // Kind::Mpc

  // Accepted forms: "rule", "mpc:lin", "mpc:rom", "rl:<checkpoint path>";
  // any form may be prefixed "name=<label>," to override the display name.
  static ControllerSpec parse(const std::string& text);
};

struct EvaluationRow {
  std::string controller;
  int day = 0;
  bool dr = false;
  double cost = 0.0;
  double discomfort = 0.0;  // summed band distance over the day
  double energy_kwh = 0.0;
  double violation = 0.0;
  double max_exceedance_kw = 0.0;
  double exceedance_minutes = 0.0;
  double degree_hours = 0.0;       // comfort-band degree hours over all zones
  bool precool_flag = false;       // DR rows: any zone >= 0.3 degC below its
  double precool_depth_c = 0.0;    // non-DR trace during the notice window
};

struct EvaluationGroupSummary {
  std::string controller;
  bool dr = false;
  int days = 0;
  double mean_cost = 0.0;
  double mean_discomfort = 0.0;
  double mean_energy_kwh = 0.0;
  double mean_violation = 0.0;
  double mean_max_exceedance_kw = 0.0;
  double mean_exceedance_minutes = 0.0;
  double mean_degree_hours = 0.0;
  int precool_days = 0;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;              // controller-major, day, then non-DR/DR
  std::vector<EvaluationGroupSummary> summary;  // means of the matching rows
  std::vector<env::DrEvent> events;             // the fixed event of each test day
};

// Runs every controller on every test day twice, without and with that day's
// fixed DR event, and writes evaluation.csv, summary.csv, report.json, and
// per-run traces under out_dir. Controllers that fail to load are reported
// together in one error.
EvaluationReport run_evaluation(const ExperimentConfig& config, const rom::BuildingModel& model,
                                const std::vector<std::vector<rom::ExogenousRecord>>& test_days,
                                const std::vector<ControllerSpec>& controllers,
                                const std::filesystem::path& out_dir, int workers);

}  // namespace hvacrl::cli
