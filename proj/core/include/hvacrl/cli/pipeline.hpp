#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "hvacrl/cli/evaluate.hpp"
#include "hvacrl/cli/experiment.hpp"
#include "hvacrl/es/trainer.hpp"
#include "hvacrl/ppo/trainer.hpp"
#include "hvacrl/rom/model.hpp"

namespace hvacrl::cli {

// Stage commands behind the command-line tool. Each one resolves and
// validates its own copy of the config and writes the resolved form next to
// its outputs, so every artifact directory is self-describing.

struct GenDataOutputs {
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;
  std::filesystem::path config_json;
};

// Synthesizes training and test operation data by driving the reference
// building with seeded random excitation under seeded synthetic weather.
GenDataOutputs cmd_gen_data(const ExperimentConfig& config);

struct ZoneFitReport {
  int zone = 0;
  std::vector<std::string> features;
  double fit_rmse = 0.0;
  double validation_rmse = 0.0;
  bool ridge_applied = false;
  double condition_number = 0.0;
};

struct FitRomOutputs {
  std::filesystem::path model_json;
  std::filesystem::path report_csv;
  std::filesystem::path config_json;
  rom::BuildingModel model;
  std::vector<ZoneFitReport> zones;
};

// Identifies a per-zone ARX model from the training data: greedy forward
// feature selection on a chronological 80/20 split, then a least-squares
// refit of the chosen structure on the full record.
FitRomOutputs cmd_fit_rom(const ExperimentConfig& config);

enum class TrainStage { Es, Ppo, Both };

struct TrainOutputs {
  std::filesystem::path es_checkpoint;
  std::filesystem::path es_curve_csv;
  std::filesystem::path ppo_policy_checkpoint;
  std::filesystem::path ppo_value_checkpoint;
  std::filesystem::path ppo_curve_csv;
  std::filesystem::path summary_json;
  std::filesystem::path config_json;
  std::optional<es::EsResult> es;
  std::optional<ppo::PpoResult> ppo;
};

// Runs the two-stage search on the identified model. The second stage always
// warm starts from the saved first-stage checkpoint, so running the stages
// in one process or in two gives identical results.
TrainOutputs cmd_train(const ExperimentConfig& config, TrainStage stage);

// Runs the requested controllers over the held-out test days; see
// run_evaluation for the artifact layout.
EvaluationReport cmd_evaluate(const ExperimentConfig& config,
                              const std::vector<ControllerSpec>& controllers, int workers);

}  // namespace hvacrl::cli
