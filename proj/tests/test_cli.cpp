#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hvacrl/cli/evaluate.hpp"
#include "hvacrl/cli/experiment.hpp"
#include "hvacrl/cli/pipeline.hpp"
#include "hvacrl/cli/report.hpp"
#include "hvacrl/common/csv.hpp"
#include "hvacrl/common/rng.hpp"

using namespace hvacrl;
using namespace hvacrl::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hvacrl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_config(const fs::path& root) {
  ExperimentConfig cfg;
  cfg.seed = 3;
  cfg.data_dir = (root / "data").string();
  cfg.checkpoint_dir = (root / "checkpoints").string();
  cfg.output_dir = (root / "outputs").string();
  cfg.training_days = 3;
  cfg.test_days = 2;
  cfg.hidden_layers = {16, 8};
  cfg.eval_episodes = 2;
  cfg.es.iterations = 2;
  cfg.es.population_size = 8;
  cfg.es.episodes_per_fitness = 1;
  cfg.ppo.iterations = 2;
  cfg.ppo.rollout_episodes = 2;
  cfg.ppo.epochs_per_batch = 2;
  cfg.ppo.minibatch_size = 288;
  return cfg;
}

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("state dimension and network architectures") {
  ExperimentConfig cfg;
  CHECK(cfg.state_dimension() == 108);

  const auto es = cfg.es_architecture();
  REQUIRE(es.size() == 9);
  CHECK(es.front() == 108);
  CHECK(es[1] == 256);
  CHECK(es.back() == 6);

  const auto ppo = cfg.ppo_architecture();
  CHECK(ppo.back() == 12);
  const auto value = cfg.value_architecture();
  CHECK(value.back() == 1);
  for (std::size_t i = 0; i + 1 < es.size(); ++i) {
    CHECK(ppo[i] == es[i]);
    CHECK(value[i] == es[i]);
  }

  cfg.hidden_layers = {32};
  cfg.scenario.k_history = 24;
  cfg.scenario.k_forecast = 12;
  CHECK(cfg.state_dimension() == 5 + 24 + 3 + 12 + 1 + 3);
}

TEST_CASE("resolve derives substream seeds and shares evaluation episodes") {
  ExperimentConfig cfg;
  cfg.seed = 3;
  cfg.resolve();
  CHECK(cfg.es.seed == derive_seed(3, "es"));
  CHECK(cfg.ppo.seed == derive_seed(3, "ppo"));
  REQUIRE(cfg.es.eval_seeds.size() == 4);
  CHECK(cfg.es.eval_seeds == cfg.ppo.eval_seeds);
  for (std::size_t i = 0; i < cfg.es.eval_seeds.size(); ++i)
    CHECK(cfg.es.eval_seeds[i] == derive_seed(3, "eval", i));

  ExperimentConfig pinned;
  pinned.seed = 3;
  pinned.es.seed = 99;
  pinned.es.eval_seeds = {7};
  pinned.resolve();
  CHECK(pinned.es.seed == 99);
  CHECK(pinned.es.eval_seeds == std::vector<std::uint64_t>{7});
  CHECK(pinned.ppo.eval_seeds.size() == 4);
  cfg.validate();
}

TEST_CASE("config json round trip") {
  const fs::path root = fresh_dir("config");
  ExperimentConfig cfg = tiny_config(root);
  cfg.resolve();

  const std::string text = cfg.to_json_string();
  const ExperimentConfig back = ExperimentConfig::from_json_string(text);
  CHECK(back.seed == cfg.seed);
  CHECK(back.hidden_layers == cfg.hidden_layers);
  CHECK(back.es.iterations == cfg.es.iterations);
  CHECK(back.es.eval_seeds == cfg.es.eval_seeds);
  CHECK(back.ppo.minibatch_size == cfg.ppo.minibatch_size);
  CHECK(back.scenario.horizon == cfg.scenario.horizon);
  CHECK(back.data_dir == cfg.data_dir);
  CHECK(back.test_days == cfg.test_days);

  const fs::path file = root / "config.json";
  cfg.save(file);
  const ExperimentConfig loaded = ExperimentConfig::load(file);
  CHECK(loaded.to_json_string() == text);

  CHECK_THROWS(ExperimentConfig::from_json_string("not json"));
}

TEST_CASE("config validation rejects bad settings") {
  ExperimentConfig cfg;
  cfg.resolve();
  cfg.validate();

  ExperimentConfig bad = cfg;
  bad.rom_n_a = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.initial_sigma = bad.sigma_floor;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.eval_episodes = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.hidden_layers = {64, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.data_dir = "";
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("controller spec parsing") {
  const ControllerSpec rule = ControllerSpec::parse("rule");
  CHECK(rule.kind == ControllerSpec::Kind::RuleBased);
  CHECK(rule.name == "rule-based");

  const ControllerSpec lin = ControllerSpec::parse("mpc:lin");
  CHECK(lin.kind == ControllerSpec::Kind::Mpc);
  CHECK(lin.variant == mpc::Variant::Lin);
  CHECK(lin.name == "mpc-lin");
  CHECK(ControllerSpec::parse("mpc:rom").variant == mpc::Variant::Rom);

  const ControllerSpec rl = ControllerSpec::parse("rl:ckpt/es_policy.ckpt");
  CHECK(rl.kind == ControllerSpec::Kind::Rl);
  CHECK(rl.checkpoint == fs::path("ckpt/es_policy.ckpt"));
  CHECK(rl.name == "es_policy");

  const ControllerSpec named = ControllerSpec::parse("name=stage-two,rl:a/ppo_policy.ckpt");
  CHECK(named.name == "stage-two");
  CHECK(named.kind == ControllerSpec::Kind::Rl);

  CHECK_THROWS_AS((void)ControllerSpec::parse("bogus"), std::invalid_argument);
  CHECK_THROWS_AS((void)ControllerSpec::parse("rl:"), std::invalid_argument);
  CHECK_THROWS_AS((void)ControllerSpec::parse("name=x"), std::invalid_argument);
}

TEST_CASE("pipeline runs end to end and is reproducible") {
  const fs::path root = fresh_dir("pipeline");
  const ExperimentConfig cfg = tiny_config(root);

  const GenDataOutputs gen = cmd_gen_data(cfg);
  REQUIRE(fs::exists(gen.train_csv));
  REQUIRE(fs::exists(gen.test_csv));
  CHECK(fs::exists(gen.config_json));
  const CsvTable train = CsvTable::read(gen.train_csv);
  CHECK(train.rows.size() == 3 * 288);
  CHECK(CsvTable::read(gen.test_csv).rows.size() == 2 * 288);

  const std::string first_bytes = file_bytes(gen.train_csv);
  (void)cmd_gen_data(cfg);
  CHECK(file_bytes(gen.train_csv) == first_bytes);

  const FitRomOutputs rom_out = cmd_fit_rom(cfg);
  REQUIRE(fs::exists(rom_out.model_json));
  CHECK(fs::exists(rom_out.report_csv));
  CHECK(rom_out.model.zone_count() == 5);
  REQUIRE(rom_out.zones.size() == 5);
  for (const auto& z : rom_out.zones) {
    CHECK(z.fit_rmse <= 1e-6);
    CHECK(z.validation_rmse <= 1e-6);
    CHECK_FALSE(z.features.empty());
  }

  const TrainOutputs both = cmd_train(cfg, TrainStage::Both);
  REQUIRE(fs::exists(both.es_checkpoint));
  REQUIRE(fs::exists(both.ppo_policy_checkpoint));
  REQUIRE(fs::exists(both.ppo_value_checkpoint));
  REQUIRE(fs::exists(both.summary_json));
  REQUIRE(both.es.has_value());
  REQUIRE(both.ppo.has_value());
  CHECK(both.es->curve.size() == 3);

  const CsvTable es_curve = CsvTable::read(both.es_curve_csv);
  CHECK(es_curve.header ==
        std::vector<std::string>{"iteration", "mean_cost", "std_cost", "min_cost", "eval_cost"});
  CHECK(es_curve.rows.size() == 2);
  const CsvTable ppo_curve = CsvTable::read(both.ppo_curve_csv);
  CHECK(ppo_curve.rows.size() == 2);

  const nlohmann::json summary = nlohmann::json::parse(file_bytes(both.summary_json));
  const double es_final = summary["es"]["final_eval_cost"].get<double>();
  const double ppo_base = summary["ppo"]["baseline_eval_cost"].get<double>();
  CHECK(ppo_base == es_final);

  // The same stages in two separate invocations give bit-identical artifacts.
  const fs::path root2 = fresh_dir("pipeline_split");
  const ExperimentConfig cfg2 = tiny_config(root2);
  (void)cmd_gen_data(cfg2);
  (void)cmd_fit_rom(cfg2);
  const TrainOutputs es_only = cmd_train(cfg2, TrainStage::Es);
  CHECK_FALSE(es_only.ppo.has_value());
  CHECK(file_bytes(es_only.es_checkpoint) == file_bytes(both.es_checkpoint));
  const TrainOutputs ppo_only = cmd_train(cfg2, TrainStage::Ppo);
  CHECK(file_bytes(ppo_only.ppo_policy_checkpoint) == file_bytes(both.ppo_policy_checkpoint));
  CHECK(file_bytes(ppo_only.ppo_curve_csv) == file_bytes(both.ppo_curve_csv));
  const nlohmann::json merged = nlohmann::json::parse(file_bytes(ppo_only.summary_json));
  CHECK(merged["es"]["final_eval_cost"].get<double>() == es_final);
  CHECK(merged["ppo"]["baseline_eval_cost"].get<double>() == es_final);

  // Evaluation artifacts for the rule-based controller.
  const EvaluationReport report = cmd_evaluate(cfg, {ControllerSpec::parse("rule")}, 1);
  CHECK(report.rows.size() == 4);
  CHECK(report.summary.size() == 2);
  CHECK(report.events.size() == 2);
  const fs::path out(cfg.output_dir);
  REQUIRE(fs::exists(out / "evaluation.csv"));
  REQUIRE(fs::exists(out / "summary.csv"));
  CHECK(fs::exists(out / "report.json"));
  REQUIRE(fs::exists(out / "traces" / "rule-based" / "day0_dr.csv"));
  REQUIRE(fs::exists(out / "traces" / "rule-based" / "day0_nodr.csv"));

  // Plots from the run artifacts.
  ReportInputs inputs;
  inputs.es_curves = {both.es_curve_csv};
  inputs.ppo_curves = {both.ppo_curve_csv};
  inputs.summary_csv = out / "summary.csv";
  inputs.dr_trace_csv = out / "traces" / "rule-based" / "day0_dr.csv";
  inputs.non_dr_trace_csv = out / "traces" / "rule-based" / "day0_nodr.csv";
  inputs.out_dir = out / "report";
  const ReportOutputs plots = cmd_report(inputs);
  CHECK(plots.files.size() == 3);
  for (const auto& f : plots.files) {
    CHECK(fs::exists(f));
    CHECK(file_bytes(f).find("<svg") != std::string::npos);
  }
}

TEST_CASE("stage two without a stage one checkpoint is an error") {
  const fs::path root = fresh_dir("ppo_first");
  const ExperimentConfig cfg = tiny_config(root);
  (void)cmd_gen_data(cfg);
  (void)cmd_fit_rom(cfg);
  try {
    (void)cmd_train(cfg, TrainStage::Ppo);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("run train --stage es first") != std::string::npos);
  }
}

TEST_CASE("fit-rom before gen-data is an error") {
  const fs::path root = fresh_dir("rom_first");
  const ExperimentConfig cfg = tiny_config(root);
  try {
    (void)cmd_fit_rom(cfg);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("run gen-data first") != std::string::npos);
  }
}

TEST_CASE("report rejects missing or half-given inputs") {
  const fs::path root = fresh_dir("report_errors");
  ReportInputs none;
  none.out_dir = root / "report";
  CHECK_THROWS_AS((void)cmd_report(none), std::invalid_argument);
  CHECK_FALSE(fs::exists(none.out_dir / "learning_curves.svg"));

  ReportInputs half;
  half.out_dir = root / "report";
  half.dr_trace_csv = root / "missing_dr.csv";
  CHECK_THROWS_AS((void)cmd_report(half), std::invalid_argument);
}
