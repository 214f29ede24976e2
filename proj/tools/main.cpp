#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvacrl/cli/pipeline.hpp"
#include "hvacrl/cli/report.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string data_dir;
  std::string checkpoint_dir;
  std::string out_dir;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Experiment config JSON")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Root seed override");
  cmd->add_option("--data-dir", opts.data_dir, "Data directory override");
  cmd->add_option("--checkpoint-dir", opts.checkpoint_dir, "Checkpoint directory override");
  cmd->add_option("--out", opts.out_dir, "Output directory override");
  cmd->add_option("--workers", opts.workers, "Worker thread count override")
      ->check(CLI::PositiveNumber);
}

hvacrl::cli::ExperimentConfig build_config(const CLI::App* cmd, const CommonOptions& opts) {
  hvacrl::cli::ExperimentConfig config;
  if (!opts.config_path.empty())
    config = hvacrl::cli::ExperimentConfig::load(opts.config_path);
  if (cmd->count("--seed") > 0) config.seed = opts.seed;
  if (!opts.data_dir.empty()) config.data_dir = opts.data_dir;
  if (!opts.checkpoint_dir.empty()) config.checkpoint_dir = opts.checkpoint_dir;
  if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
  if (opts.workers > 0) {
    config.es.worker_count = opts.workers;
    config.ppo.worker_count = opts.workers;
  }
  return config;
}

void print_written(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-interactive multi-zone HVAC control laboratory"};
  app.require_subcommand(1);

  CommonOptions gen_opts;
  CLI::App* gen = app.add_subcommand("gen-data", "Generate synthetic operation data");
  add_common(gen, gen_opts);

  CommonOptions fit_opts;
  CLI::App* fit = app.add_subcommand("fit-rom", "Identify the reduced-order building model");
  add_common(fit, fit_opts);

  CommonOptions train_opts;
  std::string stage = "both";
  CLI::App* train = app.add_subcommand("train", "Run the two-stage policy search");
  add_common(train, train_opts);
  train->add_option("--stage", stage, "Training stage: es, ppo, or both")
      ->check(CLI::IsMember({"es", "ppo", "both"}));

  CommonOptions eval_opts;
  std::vector<std::string> controller_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Compare controllers on the test days");
  add_common(evaluate, eval_opts);
  evaluate
      ->add_option("--controller", controller_args,
                   "Controller spec: rule, mpc:lin, mpc:rom, or rl:<checkpoint>; prefix "
                   "name=<label>, to relabel")
      ->required();

  hvacrl::cli::ReportInputs report_inputs;
  std::vector<std::string> es_curve_args;
  std::vector<std::string> ppo_curve_args;
  std::string summary_arg;
  std::string dr_trace_arg;
  std::string non_dr_trace_arg;
  std::string report_out = "outputs/report";
  CLI::App* report = app.add_subcommand("report", "Render SVG figures from run artifacts");
  report->add_option("--es-curve", es_curve_args, "First-stage curve CSV, one per seed");
  report->add_option("--ppo-curve", ppo_curve_args, "Second-stage curve CSV, one per seed");
  report->add_option("--summary", summary_arg, "Evaluation summary.csv");
  report->add_option("--dr-trace", dr_trace_arg, "DR-day trace CSV");
  report->add_option("--non-dr-trace", non_dr_trace_arg, "Matching non-DR-day trace CSV");
  report->add_option("--out", report_out, "Figure output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      const auto out = hvacrl::cli::cmd_gen_data(build_config(gen, gen_opts));
      print_written({out.train_csv, out.test_csv, out.config_json});
    } else if (fit->parsed()) {
      const auto out = hvacrl::cli::cmd_fit_rom(build_config(fit, fit_opts));
      for (const auto& z : out.zones) {
        std::cout << "zone " << z.zone << ": fit rmse " << z.fit_rmse << " degC, features";
        for (const auto& f : z.features) std::cout << " " << f;
        std::cout << "\n";
      }
      print_written({out.model_json, out.report_csv, out.config_json});
    } else if (train->parsed()) {
      const auto which = stage == "es"    ? hvacrl::cli::TrainStage::Es
                         : stage == "ppo" ? hvacrl::cli::TrainStage::Ppo
                                          : hvacrl::cli::TrainStage::Both;
      const auto out = hvacrl::cli::cmd_train(build_config(train, train_opts), which);
      if (out.es) {
        std::cout << "stage one: eval cost " << out.es->curve.front().eval_cost << " -> "
                  << out.es->curve.back().eval_cost << " over "
                  << out.es->curve.size() - 1 << " iterations";
        if (out.es->aborted) std::cout << " (aborted: " << out.es->abort_reason << ")";
        std::cout << "\n";
        print_written({out.es_checkpoint, out.es_curve_csv});
      }
      if (out.ppo) {
        std::cout << "stage two: eval cost " << out.ppo->curve.front().eval_cost << " -> best "
                  << out.ppo->best_eval_cost << " at iteration " << out.ppo->best_iteration;
        if (out.ppo->halted) std::cout << " (halted: " << out.ppo->halt_reason << ")";
        std::cout << "\n";
        print_written({out.ppo_policy_checkpoint, out.ppo_value_checkpoint, out.ppo_curve_csv});
      }
      print_written({out.summary_json, out.config_json});
    } else if (evaluate->parsed()) {
      std::vector<hvacrl::cli::ControllerSpec> specs;
      for (const auto& arg : controller_args)
        specs.push_back(hvacrl::cli::ControllerSpec::parse(arg));
      const auto config = build_config(evaluate, eval_opts);
      const auto report_out_data =
          hvacrl::cli::cmd_evaluate(config, specs, eval_opts.workers > 0 ? eval_opts.workers : 1);
      for (const auto& g : report_out_data.summary)
        std::cout << g.controller << " [" << (g.dr ? "dr" : "non_dr") << "]: mean cost "
                  << g.mean_cost << ", energy " << g.mean_energy_kwh << " kWh, degree hours "
                  << g.mean_degree_hours << "\n";
      std::cout << "wrote " << (std::filesystem::path(config.output_dir) / "report.json").string()
                << "\n";
    } else if (report->parsed()) {
      for (const auto& p : es_curve_args) report_inputs.es_curves.emplace_back(p);
      for (const auto& p : ppo_curve_args) report_inputs.ppo_curves.emplace_back(p);
      report_inputs.summary_csv = summary_arg;
      report_inputs.dr_trace_csv = dr_trace_arg;
      report_inputs.non_dr_trace_csv = non_dr_trace_arg;
      report_inputs.out_dir = report_out;
      const auto out = hvacrl::cli::cmd_report(report_inputs);
      print_written(out.files);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
