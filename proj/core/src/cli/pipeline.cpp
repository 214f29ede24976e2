#include "hvacrl/cli/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <utility>

#include "hvacrl/common/csv.hpp"
#include "hvacrl/common/rng.hpp"
#include "hvacrl/nn/checkpoint.hpp"
#include "hvacrl/nn/policy.hpp"
#include "hvacrl/rom/sysid.hpp"

namespace hvacrl::cli {

namespace {

ExperimentConfig resolved(ExperimentConfig config) {
  config.resolve();
  config.validate();
  return config;
}

void require_file(const std::filesystem::path& path, const std::string& hint) {
  if (!std::filesystem::exists(path))
    throw std::runtime_error("missing " + path.string() + " (" + hint + ")");
}

nn::CheckpointInfo checkpoint_info(const ExperimentConfig& config, std::string kind,
                                   std::optional<double> sigma_floor = std::nullopt) {
  nn::CheckpointInfo info;
  info.kind = std::move(kind);
  info.sigma_floor = sigma_floor;
  info.extras["temp_offset"] = config.scenario.temp_offset;
  info.extras["temp_scale"] = config.scenario.temp_scale;
  info.extras["p_limit_scale"] = config.scenario.p_limit_scale;
  return info;
}

env::EpisodeFactory make_factory(const ExperimentConfig& config, rom::BuildingModel model,
                                 const std::filesystem::path& csv, const std::string& hint) {
  require_file(csv, hint);
  rom::OperationDataset data = rom::OperationDataset::read_csv(csv, config.synthetic.dt_hours);
  auto days = data.exogenous_days(config.scenario.horizon);
  if (days.empty())
    throw std::runtime_error(csv.string() + " holds less than one full day of records");
  return env::EpisodeFactory{config.scenario, std::move(model), std::move(days)};
}

std::string join_features(const std::vector<rom::Feature>& features) {
  std::string out;
  for (const auto& f : features) {
    if (!out.empty()) out += ';';
    out += rom::feature_name(f);
  }
  return out;
}

nlohmann::json stage_section_or_null(const std::filesystem::path& summary_path,
                                     const std::string& key) {
  std::ifstream in(summary_path);
  if (!in) return nullptr;
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains(key)) return nullptr;
  return j[key];
}

}  // namespace

GenDataOutputs cmd_gen_data(const ExperimentConfig& raw) {
  const ExperimentConfig config = resolved(raw);
  const rom::BuildingModel model = rom::reference_building_model();
  if (config.synthetic.zone_count != model.zone_count())
    throw std::invalid_argument("gen-data: synthetic zone count must be " +
                                std::to_string(model.zone_count()) +
                                " to match the reference building");

  auto train_exo = rom::generate_synthetic_exogenous(config.synthetic, config.training_days,
                                                     derive_seed(config.seed, "data", 0));
  auto test_exo = rom::generate_synthetic_exogenous(config.synthetic, config.test_days,
                                                    derive_seed(config.seed, "data", 1));
  const auto train = rom::simulate_operation(model, std::move(train_exo),
                                             derive_seed(config.seed, "data-excitation", 0));
  const auto test = rom::simulate_operation(model, std::move(test_exo),
                                            derive_seed(config.seed, "data-excitation", 1));

  const std::filesystem::path data_dir(config.data_dir);
  std::filesystem::create_directories(data_dir);
  GenDataOutputs out;
  out.train_csv = data_dir / "train.csv";
  out.test_csv = data_dir / "test.csv";
  out.config_json = data_dir / "config.json";
  train.write_csv(out.train_csv);
  test.write_csv(out.test_csv);
  config.save(out.config_json);
  return out;
}

FitRomOutputs cmd_fit_rom(const ExperimentConfig& raw) {
  const ExperimentConfig config = resolved(raw);
  const std::filesystem::path train_csv = std::filesystem::path(config.data_dir) / "train.csv";
  require_file(train_csv, "run gen-data first");
  const rom::OperationDataset data =
      rom::OperationDataset::read_csv(train_csv, config.synthetic.dt_hours);

  FitRomOutputs out;
  out.model = rom::reference_building_model();
  if (data.zone_count != out.model.zone_count())
    throw std::runtime_error("fit-rom: " + train_csv.string() + " records " +
                             std::to_string(data.zone_count) + " zones, expected " +
                             std::to_string(out.model.zone_count()));
  out.model.dt_hours = data.dt_hours;

  for (int zone = 0; zone < out.model.zone_count(); ++zone) {
    std::vector<rom::Feature> candidates{{rom::FeatureKind::OutdoorTemp, -1},
                                         {rom::FeatureKind::DeliveredCooling, -1},
                                         {rom::FeatureKind::SolarGain, -1},
                                         {rom::FeatureKind::InternalGain, -1}};
    for (int other = 0; other < out.model.zone_count(); ++other)
      if (other != zone) candidates.push_back({rom::FeatureKind::OtherZoneTemp, other});
    try {
      const auto selection =
          rom::feature_select(data, zone, candidates, config.rom_n_a, config.rom_n_b);
      rom::ArxFitSpec spec;
      spec.n_a = config.rom_n_a;
      spec.n_b = config.rom_n_b;
      spec.features = selection.selected;
      spec.c_p = out.model.c_p;
      const auto fit = rom::fit_arx(data, zone, spec);
      out.model.zones[static_cast<std::size_t>(zone)] = fit.model;

      ZoneFitReport report;
      report.zone = zone + 1;
      for (const auto& f : selection.selected) report.features.push_back(rom::feature_name(f));
      report.fit_rmse = fit.rmse;
      report.validation_rmse = selection.validation_rmse;
      report.ridge_applied = fit.ridge_applied;
      report.condition_number = fit.condition_number;
      out.zones.push_back(std::move(report));
    } catch (const std::exception& e) {
      throw std::runtime_error("fit-rom: zone " + std::to_string(zone + 1) + ": " + e.what());
    }
  }
  out.model.validate();

  const std::filesystem::path ckpt_dir(config.checkpoint_dir);
  std::filesystem::create_directories(ckpt_dir);
  out.model_json = ckpt_dir / "rom.json";
  out.report_csv = ckpt_dir / "rom_report.csv";
  out.config_json = ckpt_dir / "config.json";
  out.model.save(out.model_json);

  CsvWriter report({"zone", "features", "fit_rmse", "validation_rmse", "ridge_applied",
                    "condition_number"});
  for (const auto& z : out.zones) {
    std::string features;
    for (const auto& f : z.features) {
      if (!features.empty()) features += ';';
      features += f;
    }
    report.add_row({std::to_string(z.zone), features, format_double(z.fit_rmse),
                    format_double(z.validation_rmse), z.ridge_applied ? "1" : "0",
                    format_double(z.condition_number)});
  }
  report.write(out.report_csv);
  config.save(out.config_json);
  return out;
}

TrainOutputs cmd_train(const ExperimentConfig& raw, TrainStage stage) {
  const ExperimentConfig config = resolved(raw);
  const std::filesystem::path ckpt_dir(config.checkpoint_dir);
  const std::filesystem::path out_dir(config.output_dir);
  const std::filesystem::path rom_path = ckpt_dir / "rom.json";
  require_file(rom_path, "run fit-rom first");
  const rom::BuildingModel model = rom::BuildingModel::load(rom_path);

  const auto factory =
      make_factory(config, model, std::filesystem::path(config.data_dir) / "train.csv",
                   "run gen-data first");

  std::filesystem::create_directories(ckpt_dir);
  std::filesystem::create_directories(out_dir);

  const nn::MlpSpec es_spec{config.es_architecture()};
  const nn::MlpSpec ppo_spec{config.ppo_architecture()};
  const nn::MlpSpec value_spec{config.value_architecture()};

  TrainOutputs out;
  out.es_checkpoint = ckpt_dir / "es_policy.ckpt";
  out.es_curve_csv = out_dir / "es_curve.csv";
  out.ppo_policy_checkpoint = ckpt_dir / "ppo_policy.ckpt";
  out.ppo_value_checkpoint = ckpt_dir / "ppo_value.ckpt";
  out.ppo_curve_csv = out_dir / "ppo_curve.csv";
  out.summary_json = out_dir / "train_summary.json";
  out.config_json = out_dir / "config.json";

  nlohmann::json summary;
  summary["format_version"] = 1;
  summary["seed"] = config.seed;

  if (stage == TrainStage::Es || stage == TrainStage::Both) {
    nn::Mlp net(es_spec);
    auto init_rng = make_rng(derive_seed(config.seed, "init"));
    net.init_uniform(init_rng);

    const auto cost = es::make_episode_cost(factory, es_spec);
    const es::CheckpointFn on_checkpoint = [&](int iteration, const Eigen::VectorXd& theta) {
      nn::Mlp snapshot(es_spec);
      snapshot.unflatten(theta);
      nn::save_checkpoint(ckpt_dir / ("es_iter_" + std::to_string(iteration) + ".ckpt"), snapshot,
                          checkpoint_info(config, "es_policy"));
    };
    out.es = es::train_es(net.flatten(), cost, config.es, on_checkpoint);

    nn::Mlp trained(es_spec);
    trained.unflatten(out.es->theta);
    nn::save_checkpoint(out.es_checkpoint, trained, checkpoint_info(config, "es_policy"));

    CsvWriter curve({"iteration", "mean_cost", "std_cost", "min_cost", "eval_cost"});
    for (const auto& row : out.es->curve)
      if (row.iteration >= 1)
        curve.add_row(std::vector<double>{static_cast<double>(row.iteration), row.mean_cost,
                                          row.std_cost, row.min_cost, row.eval_cost});
    curve.write(out.es_curve_csv);

    nlohmann::json section;
    section["iterations"] = static_cast<int>(out.es->curve.size()) - 1;
    section["baseline_eval_cost"] = out.es->curve.front().eval_cost;
    section["final_eval_cost"] = out.es->curve.back().eval_cost;
    section["aborted"] = out.es->aborted;
    section["abort_reason"] = out.es->abort_reason;
    summary["es"] = section;
  } else {
    summary["es"] = stage_section_or_null(out.summary_json, "es");
  }

  if (stage == TrainStage::Ppo || stage == TrainStage::Both) {
    require_file(out.es_checkpoint, "run train --stage es first");
    const auto source = nn::load_checkpoint(out.es_checkpoint);
    if (source.net.spec() != es_spec)
      throw std::runtime_error("train: " + out.es_checkpoint.string() +
                               " does not match the configured architecture");

    auto warm = nn::transfer_warm_start(source.net, ppo_spec, value_spec, config.initial_sigma,
                                        config.sigma_floor,
                                        derive_seed(config.seed, "value-init"));
    const ppo::CheckpointFn on_checkpoint = [&](int iteration, const nn::GaussianPolicy& policy,
                                                const nn::Mlp& value) {
      const std::string tag = std::to_string(iteration);
      nn::save_checkpoint(ckpt_dir / ("ppo_iter_" + tag + ".ckpt"), policy.net(),
                          checkpoint_info(config, "ppo_policy", policy.sigma_floor()));
      nn::save_checkpoint(ckpt_dir / ("ppo_value_iter_" + tag + ".ckpt"), value,
                          checkpoint_info(config, "value"));
    };
    out.ppo = ppo::train_ppo(std::move(warm.policy), std::move(warm.value), factory, config.ppo,
                             on_checkpoint);

    nn::save_checkpoint(out.ppo_policy_checkpoint, out.ppo->policy.net(),
                        checkpoint_info(config, "ppo_policy", out.ppo->policy.sigma_floor()));
    nn::save_checkpoint(out.ppo_value_checkpoint, out.ppo->value,
                        checkpoint_info(config, "value"));

    CsvWriter curve({"iteration", "eval_cost", "mean_batch_reward", "policy_loss", "value_loss",
                     "mean_sigma"});
    for (const auto& row : out.ppo->curve)
      if (row.iteration >= 1)
        curve.add_row(std::vector<double>{static_cast<double>(row.iteration), row.eval_cost,
                                          row.mean_batch_reward, row.policy_loss, row.value_loss,
                                          row.mean_sigma});
    curve.write(out.ppo_curve_csv);

    nlohmann::json section;
    section["iterations"] = static_cast<int>(out.ppo->curve.size()) - 1;
    section["baseline_eval_cost"] = out.ppo->curve.front().eval_cost;
    section["final_eval_cost"] = out.ppo->curve.back().eval_cost;
    section["best_eval_cost"] = out.ppo->best_eval_cost;
    section["best_iteration"] = out.ppo->best_iteration;
    section["halted"] = out.ppo->halted;
    section["halt_reason"] = out.ppo->halt_reason;
    summary["ppo"] = section;
  } else {
    summary["ppo"] = nullptr;
  }

  std::ofstream summary_stream(out.summary_json, std::ios::binary);
  if (!summary_stream)
    throw std::runtime_error("train: cannot write " + out.summary_json.string());
  summary_stream << summary.dump(2) << "\n";
  config.save(out.config_json);
  return out;
}

EvaluationReport cmd_evaluate(const ExperimentConfig& raw,
                              const std::vector<ControllerSpec>& controllers, int workers) {
  const ExperimentConfig config = resolved(raw);
  const std::filesystem::path rom_path = std::filesystem::path(config.checkpoint_dir) / "rom.json";
  require_file(rom_path, "run fit-rom first");
  const rom::BuildingModel model = rom::BuildingModel::load(rom_path);

  const std::filesystem::path test_csv = std::filesystem::path(config.data_dir) / "test.csv";
  require_file(test_csv, "run gen-data first");
  const rom::OperationDataset data =
      rom::OperationDataset::read_csv(test_csv, config.synthetic.dt_hours);
  auto days = data.exogenous_days(config.scenario.horizon);
  if (static_cast<int>(days.size()) < config.test_days)
    throw std::runtime_error("evaluate: " + test_csv.string() + " covers " +
                             std::to_string(days.size()) + " full days, config expects " +
                             std::to_string(config.test_days));
  days.resize(static_cast<std::size_t>(config.test_days));

  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);
  auto report =
      run_evaluation(config, model, days, controllers, out_dir, workers < 1 ? 1 : workers);
  config.save(out_dir / "config.json");
  return report;
}

}  // namespace hvacrl::cli
