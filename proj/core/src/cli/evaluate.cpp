#include "hvacrl/cli/evaluate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>

#include "hvacrl/common/csv.hpp"
#include "hvacrl/common/parallel.hpp"
#include "hvacrl/common/rng.hpp"

namespace hvacrl::cli {

using nlohmann::json;

namespace {

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
  return out;
}

std::unique_ptr<Controller> build_controller(const ControllerSpec& spec,
                                             const rom::BuildingModel& model,
                                             const mpc::MpcConfig& mpc_config) {
  switch (spec.kind) {
    case ControllerSpec::Kind::Rl:
      return make_rl_controller(spec.name, spec.checkpoint);
    case ControllerSpec::Kind::Mpc: {
      mpc::MpcConfig c = mpc_config;
      c.variant = spec.variant;
      return make_mpc_controller(spec.name, model, c);
    }
    case ControllerSpec::Kind::RuleBased:
      return make_rule_based_controller(spec.name);
  }
  throw std::logic_error("unreachable controller kind");
}

struct RunResult {
  std::vector<env::Episode::TraceRow> trace;
  double cost = 0.0;
  std::vector<rom::Bounds> bands;
  std::vector<mpc::MpcController::StepResult> mpc_log;
};

RunResult run_one(const ControllerSpec& spec, const ExperimentConfig& config,
                  const rom::BuildingModel& model,
                  const std::vector<rom::ExogenousRecord>& day,
                  const std::optional<env::DrEvent>& event) {
  auto controller = build_controller(spec, model, config.mpc);
  env::Episode episode(config.scenario, model, day, event);
  episode.reset();
  controller->begin_episode(episode);
  while (!episode.done()) episode.step_command(controller->act(episode));

  RunResult out;
  out.trace = episode.trace();
  out.cost = episode.episode_cost();
  out.bands.reserve(static_cast<std::size_t>(config.scenario.horizon));
  for (int t = 0; t < config.scenario.horizon; ++t) out.bands.push_back(episode.band_at(t));
  if (auto* mpc_ctrl = dynamic_cast<MpcEpisodeController*>(controller.get()))
    out.mpc_log = mpc_ctrl->step_log();
  return out;
}

void write_run_trace(const std::filesystem::path& path, const RunResult& run, int zones) {
  std::vector<std::string> header{"step"};
  for (int i = 1; i <= zones; ++i) header.push_back("t_zone_" + std::to_string(i));
  for (int i = 1; i <= zones; ++i) header.push_back("mdot_" + std::to_string(i));
  header.insert(header.end(), {"t_da", "power_kw", "p_limit_kw", "reward", "discomfort",
                               "energy_kwh", "violation"});
  const bool mpc_columns = !run.mpc_log.empty();
  if (mpc_columns)
    header.insert(header.end(), {"inner_iterations", "outer_passes", "converged"});
  CsvWriter w(header);
  for (std::size_t r = 0; r < run.trace.size(); ++r) {
    const auto& row = run.trace[r];
    std::vector<std::string> cells{std::to_string(row.step)};
    for (double v : row.zone_temps) cells.push_back(format_double(v));
    for (double v : row.cmd.mdot) cells.push_back(format_double(v));
    cells.push_back(format_double(row.cmd.t_da));
    cells.push_back(format_double(row.power_kw));
    cells.push_back(format_double(row.p_limit_kw));
    cells.push_back(format_double(row.reward));
    cells.push_back(format_double(row.discomfort_sum));
    cells.push_back(format_double(row.energy_kwh));
    cells.push_back(format_double(row.violation));
    if (mpc_columns) {
      const auto& info = run.mpc_log.at(r);
      cells.push_back(std::to_string(info.inner_iterations));
      cells.push_back(std::to_string(info.outer_passes));
      cells.push_back(info.converged ? "1" : "0");
    }
    w.add_row(cells);
  }
  w.write(path);
}

}  // namespace

ControllerSpec ControllerSpec::parse(const std::string& text) {
  std::string body = text;
  std::string label;
  if (body.rfind("name=", 0) == 0) {
    const auto comma = body.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("controller spec \"" + text + "\": expected name=<label>,<spec>");
    label = body.substr(5, comma - 5);
    body = body.substr(comma + 1);
  }
  ControllerSpec spec;
  if (body == "rule") {
    spec.kind = Kind::RuleBased;
    spec.name = label.empty() ? "rule-based" : label;
  } else if (body == "mpc:lin" || body == "mpc:rom") {
    spec.kind = Kind::Mpc;
    spec.variant = body == "mpc:lin" ? mpc::Variant::Lin : mpc::Variant::Rom;
    spec.name = label.empty() ? (body == "mpc:lin" ? "mpc-lin" : "mpc-rom") : label;
  } else if (body.rfind("rl:", 0) == 0) {
    spec.kind = Kind::Rl;
    spec.checkpoint = body.substr(3);
    if (spec.checkpoint.empty())
      throw std::invalid_argument("controller spec \"" + text + "\": missing checkpoint path");
    spec.name = label.empty() ? spec.checkpoint.stem().string() : label;
  } else {
    throw std::invalid_argument("controller spec \"" + text +
                                "\": expected rule, mpc:lin, mpc:rom, or rl:<path>");
  }
  return spec;
}

EvaluationReport run_evaluation(const ExperimentConfig& config, const rom::BuildingModel& model,
                                const std::vector<std::vector<rom::ExogenousRecord>>& test_days,
                                const std::vector<ControllerSpec>& controllers,
                                const std::filesystem::path& out_dir, int workers) {
  if (controllers.empty()) throw std::invalid_argument("evaluation: no controllers given");
  if (test_days.empty()) throw std::invalid_argument("evaluation: no test days given");
  const int days = static_cast<int>(test_days.size());
  const int zones = model.zone_count();

  // Fail before any simulation if a controller cannot be built, naming every
  // offender at once.
  {
    std::string failures;
    for (const auto& spec : controllers) {
      try {
        build_controller(spec, model, config.mpc);
      } catch (const std::exception& e) {
        if (!failures.empty()) failures += "; ";
        failures += e.what();
      }
    }
    if (!failures.empty()) throw std::runtime_error("controller load failed: " + failures);
  }

  // One fixed event per test day, shared by every controller.
  std::vector<env::DrEvent> events;
  events.reserve(static_cast<std::size_t>(days));
  for (int d = 0; d < days; ++d) {
    auto rng = make_rng(derive_seed(config.seed, "eval-dr", static_cast<std::uint64_t>(d)));
    std::optional<env::DrEvent> event;
    while (!event) event = env::sample_dr_event(rng, config.scenario);
    events.push_back(*event);
  }

  const int task_count = static_cast<int>(controllers.size()) * days * 2;
  std::vector<RunResult> results(static_cast<std::size_t>(task_count));
  parallel_for(task_count, workers, [&](int task) {
    const int c = task / (days * 2);
    const int d = (task / 2) % days;
    const bool dr = (task % 2) == 1;
    const std::optional<env::DrEvent> event =
        dr ? std::optional<env::DrEvent>(events[static_cast<std::size_t>(d)]) : std::nullopt;
    results[static_cast<std::size_t>(task)] =
        run_one(controllers[static_cast<std::size_t>(c)], config, model,
                test_days[static_cast<std::size_t>(d)], event);
  });

  const auto task_index = [&](int c, int d, bool dr) {
    return static_cast<std::size_t>((c * days + d) * 2 + (dr ? 1 : 0));
  };

  EvaluationReport report;
  report.events = events;
  for (int c = 0; c < static_cast<int>(controllers.size()); ++c) {
    for (int d = 0; d < days; ++d) {
      for (const bool dr : {false, true}) {
        const RunResult& run = results[task_index(c, d, dr)];
        EvaluationRow row;
        row.controller = controllers[static_cast<std::size_t>(c)].name;
        row.day = d;
        row.dr = dr;
        row.cost = run.cost;
        for (std::size_t t = 0; t < run.trace.size(); ++t) {
          const auto& tr = run.trace[t];
          row.discomfort += tr.discomfort_sum;
          row.energy_kwh += tr.energy_kwh;
          row.violation += tr.violation;
          const double excess = tr.power_kw - tr.p_limit_kw;
          if (excess > 0.0) {
            row.max_exceedance_kw = std::max(row.max_exceedance_kw, excess);
            row.exceedance_minutes += config.scenario.dt_hours * 60.0;
          }
          const auto& band = run.bands[t];
          for (double temp : tr.zone_temps) {
            const double dist = temp > band.hi ? temp - band.hi
                                               : (temp < band.lo ? band.lo - temp : 0.0);
            row.degree_hours += dist * config.scenario.dt_hours;
          }
        }
        if (dr) {
          const RunResult& base = results[task_index(c, d, false)];
          const auto& event = events[static_cast<std::size_t>(d)];
          const int from = std::max(0, event.start_step - config.scenario.k_forecast);
          for (int t = from; t < event.start_step && t < static_cast<int>(run.trace.size()); ++t) {
            for (int i = 0; i < zones; ++i) {
              const double drop =
                  base.trace[static_cast<std::size_t>(t)].zone_temps[static_cast<std::size_t>(i)] -
                  run.trace[static_cast<std::size_t>(t)].zone_temps[static_cast<std::size_t>(i)];
              row.precool_depth_c = std::max(row.precool_depth_c, drop);
            }
          }
          row.precool_flag = row.precool_depth_c >= 0.3;
        }
        report.rows.push_back(std::move(row));
      }
    }
    for (const bool dr : {false, true}) {
      EvaluationGroupSummary s;
      s.controller = controllers[static_cast<std::size_t>(c)].name;
      s.dr = dr;
      for (const auto& row : report.rows) {
        if (row.controller != s.controller || row.dr != dr) continue;
        ++s.days;
        s.mean_cost += row.cost;
        s.mean_discomfort += row.discomfort;
        s.mean_energy_kwh += row.energy_kwh;
        s.mean_violation += row.violation;
        s.mean_max_exceedance_kw += row.max_exceedance_kw;
        s.mean_exceedance_minutes += row.exceedance_minutes;
        s.mean_degree_hours += row.degree_hours;
        if (row.precool_flag) ++s.precool_days;
      }
      const double n = std::max(1, s.days);
      s.mean_cost /= n;
      s.mean_discomfort /= n;
      s.mean_energy_kwh /= n;
      s.mean_violation /= n;
      s.mean_max_exceedance_kw /= n;
      s.mean_exceedance_minutes /= n;
      s.mean_degree_hours /= n;
      report.summary.push_back(std::move(s));
    }
  }

  std::filesystem::create_directories(out_dir);
  {
    CsvWriter w({"controller", "day", "dr", "cost", "discomfort", "energy_kwh", "violation",
                 "max_exceedance_kw", "exceedance_minutes", "degree_hours", "precool_flag",
                 "precool_depth_c"});
    for (const auto& r : report.rows)
      w.add_row({r.controller, std::to_string(r.day), r.dr ? "1" : "0", format_double(r.cost),
                 format_double(r.discomfort), format_double(r.energy_kwh),
                 format_double(r.violation), format_double(r.max_exceedance_kw),
                 format_double(r.exceedance_minutes), format_double(r.degree_hours),
                 r.precool_flag ? "1" : "0", format_double(r.precool_depth_c)});
    w.write(out_dir / "evaluation.csv");
  }
  {
    CsvWriter w({"controller", "group", "days", "mean_cost", "mean_discomfort", "mean_energy_kwh",
                 "mean_violation", "mean_max_exceedance_kw", "mean_exceedance_minutes",
                 "mean_degree_hours", "precool_days"});
    for (const auto& s : report.summary)
      w.add_row({s.controller, s.dr ? "dr" : "non_dr", std::to_string(s.days),
                 format_double(s.mean_cost), format_double(s.mean_discomfort),
                 format_double(s.mean_energy_kwh), format_double(s.mean_violation),
                 format_double(s.mean_max_exceedance_kw), format_double(s.mean_exceedance_minutes),
                 format_double(s.mean_degree_hours), std::to_string(s.precool_days)});
    w.write(out_dir / "summary.csv");
  }
  {
    json j;
    j["format_version"] = 1;
    j["events"] = json::array();
    for (int d = 0; d < days; ++d) {
      const auto& e = events[static_cast<std::size_t>(d)];
      j["events"].push_back({{"day", d},
                             {"start_step", e.start_step},
                             {"duration_steps", e.duration_steps},
                             {"power_limit_kw", e.power_limit_kw},
                             {"chi", e.chi}});
    }
    j["rows"] = json::array();
    for (const auto& r : report.rows)
      j["rows"].push_back({{"controller", r.controller},
                           {"day", r.day},
                           {"dr", r.dr},
                           {"cost", r.cost},
                           {"discomfort", r.discomfort},
                           {"energy_kwh", r.energy_kwh},
                           {"violation", r.violation},
                           {"max_exceedance_kw", r.max_exceedance_kw},
                           {"exceedance_minutes", r.exceedance_minutes},
                           {"degree_hours", r.degree_hours},
                           {"precool_flag", r.precool_flag},
                           {"precool_depth_c", r.precool_depth_c}});
    j["summary"] = json::array();
    for (const auto& s : report.summary)
      j["summary"].push_back({{"controller", s.controller},
                              {"group", s.dr ? "dr" : "non_dr"},
                              {"days", s.days},
                              {"mean_cost", s.mean_cost},
                              {"mean_discomfort", s.mean_discomfort},
                              {"mean_energy_kwh", s.mean_energy_kwh},
                              {"mean_violation", s.mean_violation},
                              {"mean_max_exceedance_kw", s.mean_max_exceedance_kw},
                              {"mean_exceedance_minutes", s.mean_exceedance_minutes},
                              {"mean_degree_hours", s.mean_degree_hours},
                              {"precool_days", s.precool_days}});
    std::ofstream out(out_dir / "report.json", std::ios::binary);
    if (!out) throw std::runtime_error("evaluation: cannot write report.json");
    out << j.dump(2) << "\n";
  }
  for (int c = 0; c < static_cast<int>(controllers.size()); ++c) {
    const auto dir = out_dir / "traces" / sanitize(controllers[static_cast<std::size_t>(c)].name);
    std::filesystem::create_directories(dir);
    for (int d = 0; d < days; ++d) {
      for (const bool dr : {false, true}) {
        const auto name = "day" + std::to_string(d) + (dr ? "_dr.csv" : "_nodr.csv");
        write_run_trace(dir / name, results[task_index(c, d, dr)], zones);
      }
    }
  }
  return report;
}

}  // namespace hvacrl::cli
